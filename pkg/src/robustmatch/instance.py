"""Preference instances, single upward-shift errors, and error distributions.

An instance is a two-sided market: boys 0..n_boys-1 and girls 0..n_girls-1,
each with a strictly ordered (possibly incomplete) preference list over the
other side.  Acceptability is mutual: g appears on b's list iff b appears on
g's list.

A shift is the elementary preference error studied here: one agent's list is
altered by moving a single entry (the mover) upward over a window of k
consecutive entries.  All data structures in this module are immutable, so
instances and shifts can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

Agent = int

GIRL_LIST = "GIRL_LIST"
BOY_LIST = "BOY_LIST"
_SIDES = (GIRL_LIST, BOY_LIST)


class InstanceFormatError(ValueError):
    """Raised for malformed instance or distribution text, with a line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def boy_name(b: Agent) -> str:
    return f"b{b + 1}"


def girl_name(g: Agent) -> str:
    return f"g{g + 1}"


def _parse_agent(token: str, prefix: str, count: int, line: int) -> Agent:
    if not token.startswith(prefix) or not token[len(prefix):].isdigit():
        raise InstanceFormatError(f"expected an agent like {prefix}3, got {token!r}", line)
    ident = int(token[len(prefix):]) - 1
    if not 0 <= ident < count:
        raise InstanceFormatError(f"agent {token!r} out of range (1..{count})", line)
    return ident


@dataclass(frozen=True)
class PreferenceInstance:
    """An immutable two-sided preference system with mutual acceptability."""

    boy_prefs: tuple[tuple[Agent, ...], ...]
    girl_prefs: tuple[tuple[Agent, ...], ...]

    def __post_init__(self):
        _validate_side(self.boy_prefs, self.n_girls, "boy")
        _validate_side(self.girl_prefs, self.n_boys, "girl")
        girl_accepts = [set(prefs) for prefs in self.girl_prefs]
        boy_accepts = [set(prefs) for prefs in self.boy_prefs]
        for b, prefs in enumerate(self.boy_prefs):
            for g in prefs:
                if b not in girl_accepts[g]:
                    raise ValueError(
                        f"acceptability is not mutual: {boy_name(b)} lists "
                        f"{girl_name(g)} but not vice versa"
                    )
        for g, prefs in enumerate(self.girl_prefs):
            for b in prefs:
                if g not in boy_accepts[b]:
                    raise ValueError(
                        f"acceptability is not mutual: {girl_name(g)} lists "
                        f"{boy_name(b)} but not vice versa"
                    )

    @classmethod
    def from_lists(cls, boy_prefs, girl_prefs) -> "PreferenceInstance":
        return cls(
            tuple(tuple(p) for p in boy_prefs),
            tuple(tuple(p) for p in girl_prefs),
        )

    @property
    def n_boys(self) -> int:
        return len(self.boy_prefs)

    @property
    def n_girls(self) -> int:
        return len(self.girl_prefs)

    @cached_property
    def boy_rank(self) -> tuple[dict[Agent, int], ...]:
        """Per boy: girl id -> position in his list (0 is most preferred)."""
        return tuple({g: i for i, g in enumerate(p)} for p in self.boy_prefs)

    @cached_property
    def girl_rank(self) -> tuple[dict[Agent, int], ...]:
        return tuple({b: i for i, b in enumerate(p)} for p in self.girl_prefs)

    @cached_property
    def is_complete(self) -> bool:
        """True when both sides have equal size and every list is full."""
        if self.n_boys != self.n_girls:
            return False
        return all(len(p) == self.n_girls for p in self.boy_prefs) and all(
            len(p) == self.n_boys for p in self.girl_prefs
        )

    def prefs_of(self, side: str, agent: Agent) -> tuple[Agent, ...]:
        return (self.girl_prefs if side == GIRL_LIST else self.boy_prefs)[agent]


def _validate_side(prefs, other_count: int, who: str):
    for a, lst in enumerate(prefs):
        seen = set()
        for x in lst:
            if not 0 <= x < other_count:
                raise ValueError(f"{who} {a + 1}: listed agent id {x} out of range")
            if x in seen:
                raise ValueError(f"{who} {a + 1}: duplicate entry in preference list")
            seen.add(x)


def reversed_instance(inst: PreferenceInstance) -> PreferenceInstance:
    """Swap the roles of the two sides (girls become the proposing side)."""
    return PreferenceInstance(inst.girl_prefs, inst.boy_prefs)


# ---------------------------------------------------------------------------
# shifts

@dataclass(frozen=True)
class Shift:
    """Move ``mover`` upward over the ``window`` entries directly above it.

    ``side`` names whose list is altered: GIRL_LIST means agent is a girl and
    mover is a boy on her list, BOY_LIST the mirror image.  In a list
    (..., x1, ..., xk, mover, ...) the shifted list reads
    (..., mover, x1, ..., xk, ...).
    """

    side: str
    agent: Agent
    mover: Agent
    window: int

    def __post_init__(self):
        if self.side not in _SIDES:
            raise ValueError(f"unknown side {self.side!r}")
        if self.window < 1:
            raise ValueError("shift window must be at least 1")

    def describe(self) -> str:
        if self.side == GIRL_LIST:
            return f"{GIRL_LIST} {girl_name(self.agent)} {boy_name(self.mover)} {self.window}"
        return f"{BOY_LIST} {boy_name(self.agent)} {girl_name(self.mover)} {self.window}"


def mover_position(inst: PreferenceInstance, shift: Shift) -> int:
    """Position of the mover in the agent's list; validates the shift."""
    prefs = inst.prefs_of(shift.side, shift.agent)
    agent = girl_name(shift.agent) if shift.side == GIRL_LIST else boy_name(shift.agent)
    try:
        pos = prefs.index(shift.mover)
    except ValueError:
        raise ValueError(f"shift mover is not on the list of {agent}") from None
    if pos < shift.window:
        raise ValueError(
            f"shift window {shift.window} does not fit above position {pos} "
            f"in the list of {agent}"
        )
    return pos


def apply_shift(inst: PreferenceInstance, shift: Shift) -> PreferenceInstance:
    """Return the erroneous instance produced by one upward shift."""
    pos = mover_position(inst, shift)
    prefs = inst.prefs_of(shift.side, shift.agent)
    lo = pos - shift.window
    new_list = prefs[:lo] + (shift.mover,) + prefs[lo:pos] + prefs[pos + 1:]
    if shift.side == GIRL_LIST:
        girl_prefs = list(inst.girl_prefs)
        girl_prefs[shift.agent] = new_list
        return PreferenceInstance(inst.boy_prefs, tuple(girl_prefs))
    boy_prefs = list(inst.boy_prefs)
    boy_prefs[shift.agent] = new_list
    return PreferenceInstance(tuple(boy_prefs), inst.girl_prefs)


def reversed_shift(shift: Shift) -> Shift:
    """The same list edit, expressed for the role-reversed instance."""
    side = BOY_LIST if shift.side == GIRL_LIST else GIRL_LIST
    return Shift(side, shift.agent, shift.mover, shift.window)


def enumerate_shift_domain(inst: PreferenceInstance) -> list[Shift]:
    """All single upward shifts over the instance, in a deterministic order.

    Each list of length L contributes L*(L-1)/2 shifts: every mover position
    paired with every window that stays inside the list.
    """
    domain = []
    for side, side_prefs in ((GIRL_LIST, inst.girl_prefs), (BOY_LIST, inst.boy_prefs)):
        for agent, prefs in enumerate(side_prefs):
            for pos in range(1, len(prefs)):
                mover = prefs[pos]
                for window in range(1, pos + 1):
                    domain.append(Shift(side, agent, mover, window))
    return domain


# ---------------------------------------------------------------------------
# distributions

@dataclass(frozen=True)
class ShiftDistribution:
    """A probability distribution over shifts, with exact rational weights.

    Non-empty distributions must sum to exactly 1.  ``allow_partial`` relaxes
    that to <= 1 for internal sensitivity tests; file parsing never sets it.
    """

    entries: tuple[tuple[Shift, Fraction], ...]
    allow_partial: bool = False

    def __post_init__(self):
        seen = set()
        total = Fraction(0)
        for shift, p in self.entries:
            if shift in seen:
                raise ValueError(f"duplicate shift in distribution: {shift.describe()}")
            seen.add(shift)
            if p < 0:
                raise ValueError(f"negative probability for {shift.describe()}")
            total += p
        if self.entries and not self.allow_partial and total != 1:
            raise ValueError(f"distribution sums to {total}, expected exactly 1")
        if self.allow_partial and total > 1:
            raise ValueError(f"distribution sums to {total}, more than 1")

    @property
    def total(self) -> Fraction:
        return sum((p for _, p in self.entries), Fraction(0))

    def validate_for(self, inst: PreferenceInstance):
        """Check that every supported shift is applicable to ``inst``."""
        for shift, _ in self.entries:
            mover_position(inst, shift)

    @classmethod
    def uniform(cls, inst: PreferenceInstance) -> "ShiftDistribution":
        domain = enumerate_shift_domain(inst)
        if not domain:
            return cls(())
        p = Fraction(1, len(domain))
        return cls(tuple((shift, p) for shift in domain))


def parse_shift(text: str, inst: PreferenceInstance, line: int | None = None) -> Shift:
    """Parse ``SIDE agent mover k`` (e.g. ``GIRL_LIST g1 b1 1``)."""
    parts = text.split()
    if len(parts) != 4:
        raise InstanceFormatError(f"expected 'SIDE agent mover k', got {text!r}", line)
    side, agent_tok, mover_tok, k_tok = parts
    if side not in _SIDES:
        raise InstanceFormatError(f"unknown side {side!r}", line)
    if side == GIRL_LIST:
        agent = _parse_agent(agent_tok, "g", inst.n_girls, line)
        mover = _parse_agent(mover_tok, "b", inst.n_boys, line)
    else:
        agent = _parse_agent(agent_tok, "b", inst.n_boys, line)
        mover = _parse_agent(mover_tok, "g", inst.n_girls, line)
    if not k_tok.isdigit() or int(k_tok) < 1:
        raise InstanceFormatError(f"window must be a positive integer, got {k_tok!r}", line)
    shift = Shift(side, agent, mover, int(k_tok))
    try:
        mover_position(inst, shift)
    except ValueError as exc:
        raise InstanceFormatError(str(exc), line) from None
    return shift


def parse_distribution(text: str, inst: PreferenceInstance) -> ShiftDistribution:
    """Parse distribution text: one ``SIDE agent mover k p_num/p_den`` per line."""
    entries = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.rsplit(None, 1)
        if len(parts) != 2:
            raise InstanceFormatError("expected 'SIDE agent mover k p_num/p_den'", line_no)
        shift = parse_shift(parts[0], inst, line_no)
        try:
            p = Fraction(parts[1])
        except (ValueError, ZeroDivisionError):
            raise InstanceFormatError(f"bad probability {parts[1]!r}", line_no) from None
        entries.append((shift, p))
    try:
        return ShiftDistribution(tuple(entries))
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from None


def serialize_distribution(dist: ShiftDistribution) -> str:
    lines = []
    for shift, p in dist.entries:
        lines.append(f"{shift.describe()} {p.numerator}/{p.denominator}")
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# instance file format

def parse_instance(text: str) -> PreferenceInstance:
    """Parse the plain-text instance format.

    Line 1 holds ``n`` (or ``n_boys n_girls`` for unequal sides), followed by
    one ``b<i>: ...`` line per boy and one ``g<j>: ...`` line per girl, in
    id order.  Empty lists are written as ``b1:`` with nothing after the colon.
    """
    lines = text.splitlines()
    meaningful = [(i + 1, ln.strip()) for i, ln in enumerate(lines) if ln.strip()]
    if not meaningful:
        raise InstanceFormatError("empty instance file")
    header_line, header = meaningful[0]
    counts = header.split()
    if len(counts) not in (1, 2) or not all(c.isdigit() for c in counts):
        raise InstanceFormatError(f"expected 'n' or 'n_boys n_girls', got {header!r}", header_line)
    n_boys = int(counts[0])
    n_girls = int(counts[-1])
    body = meaningful[1:]
    if len(body) != n_boys + n_girls:
        raise InstanceFormatError(
            f"expected {n_boys + n_girls} preference lines, found {len(body)}",
            header_line,
        )

    def read_lists(rows, prefix, count, other_prefix, other_count):
        out = []
        for idx, (line_no, row) in enumerate(rows):
            head, sep, rest = row.partition(":")
            if not sep:
                raise InstanceFormatError("missing ':' in preference line", line_no)
            expected = f"{prefix}{idx + 1}"
            if head.strip() != expected:
                raise InstanceFormatError(
                    f"expected list for {expected}, got {head.strip()!r}", line_no
                )
            prefs = []
            seen = set()
            for token in rest.split():
                a = _parse_agent(token, other_prefix, other_count, line_no)
                if a in seen:
                    raise InstanceFormatError(f"duplicate entry {token}", line_no)
                seen.add(a)
                prefs.append(a)
            out.append(tuple(prefs))
        return tuple(out)

    boy_prefs = read_lists(body[:n_boys], "b", n_boys, "g", n_girls)
    girl_prefs = read_lists(body[n_boys:], "g", n_girls, "b", n_boys)
    try:
        return PreferenceInstance(boy_prefs, girl_prefs)
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from None


def serialize_instance(inst: PreferenceInstance) -> str:
    lines = []
    if inst.n_boys == inst.n_girls:
        lines.append(str(inst.n_boys))
    else:
        lines.append(f"{inst.n_boys} {inst.n_girls}")
    for b, prefs in enumerate(inst.boy_prefs):
        entries = " ".join(girl_name(g) for g in prefs)
        lines.append(f"{boy_name(b)}: {entries}".rstrip())
    for g, prefs in enumerate(inst.girl_prefs):
        entries = " ".join(boy_name(b) for b in prefs)
        lines.append(f"{girl_name(g)}: {entries}".rstrip())
    return "\n".join(lines) + "\n"
