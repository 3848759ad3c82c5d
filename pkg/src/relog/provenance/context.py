"""Provenance semirings: unit, min-max-prob, and top-k-proofs tags.

A top-k-proofs tag is a DNF over input-variable literals: a set of
proofs, each proof a set of (variable id, positive?) literals, pruned to
the k proofs of highest individual probability after every combination.
Probabilities are recovered by exact weighted model counting (Shannon
expansion, memoized) that respects categorical variable groups.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional

from relog.errors import WmcSupportTooLargeError

Literal = tuple[int, bool]
Proof = frozenset  # of Literal

DEFAULT_TOP_K = 3
DEFAULT_WMC_VAR_CAP = 18


class InputVarTable:
    """Probabilities of input variables plus categorical groupings."""

    def __init__(self):
        self.probs: dict[int, float] = {}
        self.group_of: dict[int, int] = {}
        self.groups: dict[int, list[int]] = {}
        self._next_var = 0
        self._next_group = 0

    def add_var(self, prob: float) -> int:
        if not (0.0 <= prob <= 1.0):
            raise ValueError(f"probability {prob} outside [0, 1]")
        vid = self._next_var
        self._next_var += 1
        self.probs[vid] = prob
        return vid

    def add_categorical(self, probs: list[float]) -> list[int]:
        if sum(probs) > 1.0 + 1e-9:
            raise ValueError(f"categorical probabilities sum to {sum(probs)} > 1")
        gid = self._next_group
        self._next_group += 1
        members = [self.add_var(p) for p in probs]
        self.groups[gid] = members
        for v in members:
            self.group_of[v] = gid
        return members

    def proof_prob(self, proof: Proof) -> float:
        """Probability of a single conjunction of literals (group-aware)."""
        p = 1.0
        by_group: dict[int, list[Literal]] = {}
        for lit in proof:
            vid, pos = lit
            gid = self.group_of.get(vid)
            if gid is None:
                p *= self.probs[vid] if pos else 1.0 - self.probs[vid]
            else:
                by_group.setdefault(gid, []).append(lit)
        for gid, lits in by_group.items():
            positives = [v for v, pos in lits if pos]
            negatives = [v for v, pos in lits if not pos]
            if len(positives) > 1 or (positives and positives[0] in negatives):
                return 0.0
            if positives:
                p *= self.probs[positives[0]]
            else:
                p *= max(0.0, 1.0 - sum(self.probs[v] for v in set(negatives)))
        return p


@dataclass(frozen=True)
class DnfTag:
    proofs: frozenset  # of Proof

    def support(self) -> set[int]:
        return {vid for proof in self.proofs for vid, _ in proof}

    def __repr__(self) -> str:
        inner = " | ".join(
            "{" + ",".join(f"{'' if pos else '~'}v{vid}" for vid, pos in sorted(p)) + "}"
            for p in sorted(self.proofs, key=lambda p: sorted(p)))
        return f"DnfTag({inner or 'false'})"


def _subsume(proofs: set) -> set:
    """Drop proofs that are supersets of another proof."""
    out = set()
    for p in sorted(proofs, key=len):
        if not any(q <= p for q in out):
            out.add(p)
    return out


class ProvenanceContext:
    """Base interface; concrete variants fill in the semiring operations."""

    name = "abstract"

    def __init__(self):
        self.var_table = InputVarTable()

    # tag algebra
    def zero(self):
        raise NotImplementedError

    def one(self):
        raise NotImplementedError

    def tag_or(self, a, b):
        raise NotImplementedError

    def tag_and(self, a, b):
        raise NotImplementedError

    def is_zero(self, tag) -> bool:
        raise NotImplementedError

    def tag_saturated(self, old, new) -> bool:
        raise NotImplementedError

    def from_prob(self, prob: Optional[float]):
        """Tag for a newly loaded fact; allocates an input variable if tagged."""
        raise NotImplementedError

    def from_var(self, vid: int):
        raise NotImplementedError

    def recover_probability(self, tag, wmc_var_cap: int = DEFAULT_WMC_VAR_CAP):
        raise NotImplementedError


class UnitContext(ProvenanceContext):
    """Plain Datalog: a tuple is present or absent."""

    name = "unit"

    def zero(self):
        return False

    def one(self):
        return True

    def tag_or(self, a, b):
        return a or b

    def tag_and(self, a, b):
        return a and b

    def is_zero(self, tag) -> bool:
        return not tag

    def tag_saturated(self, old, new) -> bool:
        return bool(old) == bool(new)

    def from_prob(self, prob):
        return True

    def from_var(self, vid):
        return True

    def recover_probability(self, tag, wmc_var_cap: int = DEFAULT_WMC_VAR_CAP):
        return None


class MinMaxProbContext(ProvenanceContext):
    """Fuzzy semiring: or = max, and = min."""

    name = "minmaxprob"

    def zero(self):
        return 0.0

    def one(self):
        return 1.0

    def tag_or(self, a, b):
        return max(a, b)

    def tag_and(self, a, b):
        return min(a, b)

    def is_zero(self, tag) -> bool:
        return tag <= 0.0

    def tag_saturated(self, old, new) -> bool:
        return new <= old + 1e-12

    def from_prob(self, prob):
        return 1.0 if prob is None else float(prob)

    def from_var(self, vid):
        return self.var_table.probs[vid]

    def recover_probability(self, tag, wmc_var_cap: int = DEFAULT_WMC_VAR_CAP):
        return float(tag)


class TopKProofsContext(ProvenanceContext):
    name = "topkproofs"

    def __init__(self, k: int = DEFAULT_TOP_K):
        super().__init__()
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k
        self._wmc_memo: dict[frozenset, float] = {}

    def zero(self):
        return DnfTag(frozenset())

    def one(self):
        return DnfTag(frozenset([frozenset()]))

    def is_zero(self, tag) -> bool:
        return not tag.proofs

    def from_prob(self, prob):
        if prob is None:
            return self.one()
        vid = self.var_table.add_var(float(prob))
        return self.from_var(vid)

    def from_var(self, vid):
        return DnfTag(frozenset([frozenset([(vid, True)])]))

    def from_world(self, assignment: dict[int, bool]):
        """Tag for one possible world: a single all-literals proof."""
        return DnfTag(frozenset([frozenset(assignment.items())]))

    def _normalize(self, proofs: set) -> DnfTag:
        proofs = _subsume(proofs)
        if len(proofs) > self.k:
            table = self.var_table
            ranked = sorted(
                proofs,
                key=lambda p: (-table.proof_prob(p), sorted(p)))
            proofs = set(ranked[:self.k])
        return DnfTag(frozenset(proofs))

    def tag_or(self, a: DnfTag, b: DnfTag) -> DnfTag:
        return self._normalize(set(a.proofs) | set(b.proofs))

    def tag_and(self, a: DnfTag, b: DnfTag) -> DnfTag:
        out = set()
        group_of = self.var_table.group_of
        for pa in a.proofs:
            for pb in b.proofs:
                merged = pa | pb
                if self._contradictory(merged, group_of):
                    continue
                out.add(merged)
        return self._normalize(out)

    @staticmethod
    def _contradictory(proof: Proof, group_of: dict[int, int]) -> bool:
        positive_groups: dict[int, int] = {}
        seen: dict[int, bool] = {}
        for vid, pos in proof:
            if vid in seen and seen[vid] != pos:
                return True
            seen[vid] = pos
            if pos:
                gid = group_of.get(vid)
                if gid is not None:
                    if gid in positive_groups and positive_groups[gid] != vid:
                        return True
                    positive_groups[gid] = vid
        return False

    def tag_saturated(self, old: DnfTag, new: DnfTag) -> bool:
        return old.proofs == new.proofs

    def recover_probability(self, tag: DnfTag,
                            wmc_var_cap: int = DEFAULT_WMC_VAR_CAP) -> float:
        support = tag.support()
        if len(support) > wmc_var_cap:
            raise WmcSupportTooLargeError(len(support), wmc_var_cap)
        return self._wmc(tag.proofs)

    def _wmc(self, proofs: frozenset) -> float:
        if not proofs:
            return 0.0
        if frozenset() in proofs:
            return 1.0
        memo = self._wmc_memo
        key = proofs
        if key in memo:
            return memo[key]
        table = self.var_table
        counts = Counter(vid for p in proofs for vid, _ in p)
        # most frequent variable first; ties break on the smaller id
        branch_var = min(counts, key=lambda v: (-counts[v], v))
        gid = table.group_of.get(branch_var)
        total = 0.0
        if gid is None:
            pv = table.probs[branch_var]
            total += pv * self._wmc(_condition(proofs, {branch_var: True}))
            total += (1.0 - pv) * self._wmc(_condition(proofs, {branch_var: False}))
        else:
            members = table.groups[gid]
            remaining = 1.0
            for m in members:
                pm = table.probs[m]
                remaining -= pm
                assignment = {x: (x == m) for x in members}
                total += pm * self._wmc(_condition(proofs, assignment))
            if remaining > 1e-12:
                none_chosen = {x: False for x in members}
                total += remaining * self._wmc(_condition(proofs, none_chosen))
        memo[key] = total
        return total


def _condition(proofs: frozenset, assignment: dict[int, bool]) -> frozenset:
    out = set()
    for proof in proofs:
        residual = []
        dead = False
        for vid, pos in proof:
            if vid in assignment:
                if assignment[vid] != pos:
                    dead = True
                    break
            else:
                residual.append((vid, pos))
        if dead:
            continue
        if not residual:
            return frozenset([frozenset()])
        out.add(frozenset(residual))
    return frozenset(out)


def make_context(name: str, k: int = DEFAULT_TOP_K) -> ProvenanceContext:
    if name == "unit":
        return UnitContext()
    if name == "minmaxprob":
        return MinMaxProbContext()
    if name == "topkproofs":
        return TopKProofsContext(k)
    raise ValueError(f"unknown provenance '{name}'")
