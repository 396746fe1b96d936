"""What a single upward preference shift does to the set of stable matchings.

Moving one entry up in one list can only create one new blocking pair
candidate: the moved agent together with the list owner.  Which stable
matchings that pair actually breaks is an interval-like slice of the
lattice, pinned down by at most one entry rotation and one exit rotation.
This module computes those rotations for a shift, classifies the outcome,
and exposes the destabilized set as a poset fragment of its own.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass

from .instance import (
    GIRL_LIST,
    PreferenceInstance,
    Shift,
    apply_shift,
    mover_position,
    reversed_instance,
    reversed_shift,
)
from .matching import Matching, boy_optimal, is_stable, unmatched_agents
from .rotations import RotationPoset, build_rotation_poset, closed_set_to_matching

UNCHANGED = "UNCHANGED"      # the shifted instance has exactly the same stable matchings
DISJOINT = "DISJOINT"        # no stable matching survives the shift
EMPTY_MAB = "EMPTY_MAB"      # every stable matching survives the shift
PROPER = "PROPER"            # some survive, some break; entry/exit rotations apply

STATUSES = (UNCHANGED, DISJOINT, EMPTY_MAB, PROPER)


@dataclass(frozen=True)
class ShiftAnalysis:
    """Outcome of one shift.  rho_in/rho_out are rotation ids; None stands for
    the virtual bottom (always applied) and top (never applied) endpoints and
    the two fields are only meaningful when the status is PROPER."""

    shift: Shift
    status: str
    rho_in: int | None = None
    rho_out: int | None = None

    def destabilizes_mask(self, mask: int) -> bool:
        """Whether the stable matching with this closed rotation set breaks."""
        if self.status == DISJOINT:
            return True
        if self.status != PROPER:
            return False
        if self.rho_in is not None and not (mask >> self.rho_in) & 1:
            return False
        return self.rho_out is None or not (mask >> self.rho_out) & 1


def _window_partners(poset: RotationPoset, inst: PreferenceInstance, shift: Shift):
    """(best, worst) stable partners of the list owner inside the shift window.

    The window is the run of positions the mover jumps over; a partner there
    is outranked by the mover after the shift.  Returns None when no stable
    partner falls inside it.
    """
    g, i = shift.agent, mover_position(inst, shift)
    positions = poset.girl_slot_positions.get(g)
    if not positions:
        return None
    boys = poset.girl_slot_boys[g]
    left = bisect_left(positions, i - shift.window)
    right = bisect_left(positions, i)
    if left == right:
        return None
    return boys[left], boys[right - 1]


def find_component_rotations(poset: RotationPoset, inst: PreferenceInstance, shift: Shift):
    """(rho1, rho2, rho3) for a girl-list shift; None where a rotation does not exist.

    rho1 moves the girl to her worst stable partner inside the window, rho2
    moves the mover below the girl, rho3 moves the girl away from her best
    stable partner inside the window.
    """
    if shift.side != GIRL_LIST:
        raise ValueError("component rotations are defined on girl-list shifts; reverse roles first")
    g, b = shift.agent, shift.mover
    rho1 = rho3 = None
    window = _window_partners(poset, inst, shift)
    if window is not None:
        best, worst = window
        rho1 = poset.post_pair.get((worst, g))
        rho3 = poset.pre_pair.get((best, g))
    rho2 = poset.below_girl.get((b, g))
    return rho1, rho2, rho3


def _matched_sets_differ(poset: RotationPoset, inst: PreferenceInstance, shift: Shift) -> bool:
    """Whether the shift changes which agents are matched in stable matchings.

    Complete instances with equal sides always match everyone, so the test
    short-circuits there; otherwise one proposal round on the shifted
    instance decides (the unmatched set is the same in all stable matchings).
    """
    if inst.is_complete and inst.n_boys == inst.n_girls:
        return False
    shifted = apply_shift(inst, shift)
    return unmatched_agents(inst, poset.boy_opt) != unmatched_agents(shifted, boy_optimal(shifted))


def _reversed_companion(poset: RotationPoset):
    """The poset of the role-reversed instance plus the rotation id map back.

    A reversed rotation undoes what exactly one original rotation does: its
    pairs, read back in boy-girl order, are that rotation's post-elimination
    pairs.  The correspondence reverses the precedence order.
    """
    if poset._reversed is None:
        rposet = build_rotation_poset(reversed_instance(poset.inst))
        if rposet.size != poset.size:
            raise AssertionError("role reversal changed the number of rotations")
        mapping = []
        for rot in rposet.rotations:
            ids = {poset.post_pair.get((b, g)) for g, b in rot.pairs}
            if len(ids) != 1 or None in ids:
                raise AssertionError("reversed rotation does not undo a unique original rotation")
            mapping.append(ids.pop())
        if len(set(mapping)) != poset.size:
            raise AssertionError("rotation correspondence under role reversal is not a bijection")
        poset._reversed = (rposet, tuple(mapping))
    return poset._reversed


def _analyze_girl_list(poset: RotationPoset, inst: PreferenceInstance, shift: Shift) -> ShiftAnalysis:
    g, b = shift.agent, shift.mover
    window = _window_partners(poset, inst, shift)
    if window is None:
        return ShiftAnalysis(shift, EMPTY_MAB)
    mover_first = poset.boy_opt.girl_of(b)
    if mover_first is not None:
        # the mover is matched in every stable matching; unless even his worst
        # partner is below the girl, he never prefers her and nothing breaks
        mover_worst = poset.girl_opt.girl_of(b)
        if inst.boy_rank[b][mover_worst] <= inst.boy_rank[b][g]:
            return ShiftAnalysis(shift, EMPTY_MAB)
    best, worst = window
    rho1 = poset.post_pair.get((worst, g))
    rho3 = poset.pre_pair.get((best, g))
    rho2 = poset.below_girl.get((b, g))
    if rho2 is None and mover_first is not None and inst.boy_rank[b][mover_first] <= inst.boy_rank[b][g]:
        raise AssertionError("mover crosses below the girl but no rotation records it")
    if rho2 is not None and rho3 is not None and poset.leq(rho3, rho2):
        return ShiftAnalysis(shift, EMPTY_MAB)
    rho_in = rho2 if rho2 is not None else rho1
    rho_out = rho3
    if rho_in is None and rho_out is None:
        if is_stable(apply_shift(inst, shift), poset.boy_opt):
            return ShiftAnalysis(shift, UNCHANGED)
        return ShiftAnalysis(shift, DISJOINT)
    if rho_in is not None and rho_out is not None and poset.leq(rho_out, rho_in):
        raise AssertionError("exit rotation precedes entry rotation in a proper analysis")
    return ShiftAnalysis(shift, PROPER, rho_in, rho_out)


def analyze_shift(poset: RotationPoset, inst: PreferenceInstance, shift: Shift) -> ShiftAnalysis:
    """Classify one shift and find its entry/exit rotations.

    Boy-list shifts run the girl-list analysis on the role-reversed instance;
    reversal flips the lattice upside down, so the reversed entry becomes the
    exit and vice versa, and the bottom/top endpoints trade places.
    """
    if _matched_sets_differ(poset, inst, shift):
        return ShiftAnalysis(shift, DISJOINT)
    if shift.side == GIRL_LIST:
        return _analyze_girl_list(poset, inst, shift)
    rposet, mapping = _reversed_companion(poset)
    mirrored = _analyze_girl_list(rposet, rposet.inst, reversed_shift(shift))
    if mirrored.status != PROPER:
        return ShiftAnalysis(shift, mirrored.status)
    rho_in = mapping[mirrored.rho_out] if mirrored.rho_out is not None else None
    rho_out = mapping[mirrored.rho_in] if mirrored.rho_in is not None else None
    return ShiftAnalysis(shift, PROPER, rho_in, rho_out)


def characterize_MAB(inst: PreferenceInstance, shift: Shift, matching: Matching) -> bool:
    """Positional test for whether the shift destabilizes a stable matching.

    True exactly when the list owner's partner sits inside the shift window
    and the mover prefers the owner to their own situation (any acceptable
    partner beats being unmatched).
    """
    i = mover_position(inst, shift)
    if shift.side == GIRL_LIST:
        owner_rank = inst.girl_rank[shift.agent]
        partner = matching.boy_of(shift.agent)
        mate = matching.girl_of(shift.mover)
        mover_rank = inst.boy_rank[shift.mover]
    else:
        owner_rank = inst.boy_rank[shift.agent]
        partner = matching.girl_of(shift.agent)
        mate = matching.boy_of(shift.mover)
        mover_rank = inst.girl_rank[shift.mover]
    if partner is None:
        return False
    pos = owner_rank[partner]
    if pos < i - shift.window or pos >= i:
        return False
    return mate is None or mover_rank[mate] > mover_rank[shift.agent]


# ---------------------------------------------------------------------------
# the destabilized set as a lattice of its own

@dataclass(frozen=True)
class SublatticePoset:
    """Rotation poset fragment generating the destabilized matchings.

    Starting from the matching generated by in_mask, applying any closed
    subset of fragment_ids (order induced from the full poset) stays inside
    the destabilized set, and every destabilized matching arises that way.
    """

    poset: RotationPoset
    in_mask: int
    out_mask: int
    fragment_ids: tuple[int, ...]

    @property
    def fragment_mask(self) -> int:
        mask = 0
        for v in self.fragment_ids:
            mask |= 1 << v
        return mask

    def closed_masks(self) -> list[int]:
        closure = self.poset.pred_closure
        fmask = self.fragment_mask
        ids = self.fragment_ids
        out: list[int] = []

        def grow(mask: int, start: int):
            out.append(mask)
            for at in range(start, len(ids)):
                v = ids[at]
                if not (mask >> v) & 1 and (closure[v] & fmask & ~mask) == 0:
                    grow(mask | (1 << v), at + 1)

        grow(0, 0)
        return out

    def matchings(self) -> list[Matching]:
        return [closed_set_to_matching(self.poset, self.in_mask | m) for m in self.closed_masks()]


def sublattice_poset(poset: RotationPoset, analysis: ShiftAnalysis):
    """(fragment, boy-best destabilized matching, girl-best destabilized matching).

    Only proper analyses have a destabilized sublattice; everything at or
    below the entry rotation is forced in, everything at or above the exit
    rotation is forced out, and the fragment is what remains free.
    """
    if analysis.status != PROPER:
        raise ValueError(f"sublattice is only defined for PROPER analyses, not {analysis.status}")
    in_mask = 0
    if analysis.rho_in is not None:
        in_mask = poset.pred_closure[analysis.rho_in] | (1 << analysis.rho_in)
    out_mask = 0
    if analysis.rho_out is not None:
        out_mask = poset.succ_closure[analysis.rho_out] | (1 << analysis.rho_out)
    fragment_ids = tuple(v for v in range(poset.size) if not ((in_mask | out_mask) >> v) & 1)
    boy_best = closed_set_to_matching(poset, in_mask)
    girl_best = closed_set_to_matching(poset, poset.full_mask & ~out_mask)
    return SublatticePoset(poset, in_mask, out_mask, fragment_ids), boy_best, girl_best
