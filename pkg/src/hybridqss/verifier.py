"""Brute-force certification of a plan's access structure.

Exact mode simulates the plan on the d basis secrets (the columns of the
encoding isometry) for every QOTP key tuple, which is equivalent to dealing
one half of a maximally entangled pair. For a subset T:

* claimed authorized: every key tree T can open is checked to reconstruct
  correctly for every digit value and every randomness branch, and the
  quantum decode is run for every key tuple; the verdict uses the worst
  fidelity over the tomographic secret set;
* claimed unauthorized: T's classical view of each key digit is enumerated
  over all randomness; views with proportional likelihoods are merged, and
  for each combination of views the key-averaged reduced state of T's
  qudits is compared across the tomographic secrets.

Channel linearity makes equality on the tomographic set sufficient for all
secrets.
"""

from __future__ import annotations

import functools
import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .access_structure import check_no_cloning, fmt_set
from .classical_sharing import (
    PUBLIC,
    ClassicalShare,
    CNode,
    FieldElement,
    digit_view_counts,
    reconstruct_tree,
    split_tree_digit,
    tree_obtains,
    tree_players,
    tree_randomness_count,
)
from .errors import CapacityError, InsufficientShares, SchemeError
from .hybrid_protocols import (
    Deal,
    Encrypt,
    Qts,
    SchemePlan,
    claimed_structure,
    decode,
    encode,
    plain_qts,
    walk,
)
from .qts_codes import DISCARDED, qotp_decrypt, qotp_encrypt, qotp_key_average, QotpKey
from .quantum_sim import MAX_PURE_DIM, QuditState, ket, partial_trace, tomographic_set, trace_distance_matrices

AUTHORIZED_OK = "AUTHORIZED-OK"
FORBIDDEN_OK = "FORBIDDEN-OK"
LEAKY = "LEAKY"
RECONSTRUCTION_FAIL = "RECONSTRUCTION-FAIL"

EXACT_BRANCH_LIMIT = 10**6
MONTE_CARLO_SAMPLES = 2000
COLUMN_BUDGET = 60_000_000  # complex amplitudes held for all key tuples


@dataclass(frozen=True)
class AdversaryView:
    subset: frozenset[str]
    quantum_part: QuditState | None
    classical_part: tuple[ClassicalShare, ...]
    randomness: dict


def adversary_view(dl: Deal, players: Iterable[str]) -> AdversaryView:
    """What ``players`` hold after a deal: their qudits' reduced state and classical shares."""
    t = dl.plan.roster.check(players)
    pos = [i for i, lab in enumerate(dl.global_state.labels) if lab in t and lab != DISCARDED]
    q = partial_trace(dl.global_state, pos) if pos else None
    # only the branch id: the recorded draws include the dealer's key digits
    return AdversaryView(t, q, tuple(dl.shares_of(t)), {"seed": dl.randomness_record.get("seed")})


@dataclass(frozen=True)
class SubsetVerdict:
    subset: frozenset[str]
    claimed_authorized: bool
    verdict: str
    fidelity: float | None = None
    trace_distance: float | None = None
    detail: str = ""
    sampled: bool = False

    @property
    def ok(self) -> bool:
        return self.verdict in (AUTHORIZED_OK, FORBIDDEN_OK)


@dataclass
class VerificationReport:
    verdicts: list[SubsetVerdict]
    mode: str
    tolerance: float
    kind: str = ""
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(v.ok for v in self.verdicts)

    def verdict_map(self) -> dict[frozenset[str], str]:
        return {v.subset: v.verdict for v in self.verdicts}

    def counts(self) -> dict[str, int]:
        out = {AUTHORIZED_OK: 0, FORBIDDEN_OK: 0, LEAKY: 0, RECONSTRUCTION_FAIL: 0}
        for v in self.verdicts:
            out[v.verdict] += 1
        return out

    def to_tsv(self) -> str:
        rows = ["subset\tclaimed\tverdict\tfidelity\ttrace_distance\tdetail"]
        for v in self.verdicts:
            rows.append(
                "\t".join(
                    [
                        fmt_set(v.subset) or "{}",
                        "authorized" if v.claimed_authorized else "forbidden",
                        v.verdict,
                        "" if v.fidelity is None else f"{v.fidelity:.12f}",
                        "" if v.trace_distance is None else f"{v.trace_distance:.3e}",
                        v.detail,
                    ]
                )
            )
        return "\n".join(rows) + "\n"

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "tolerance": self.tolerance,
            "kind": self.kind,
            "ok": self.ok,
            "counts": self.counts(),
            "warnings": list(self.warnings),
            "subsets": [
                {
                    "subset": sorted(v.subset),
                    "claimed": "authorized" if v.claimed_authorized else "forbidden",
                    "verdict": v.verdict,
                    "fidelity": v.fidelity,
                    "trace_distance": v.trace_distance,
                    "detail": v.detail,
                    "sampled": v.sampled,
                }
                for v in self.verdicts
            ],
        }

    def summary(self) -> str:
        c = self.counts()
        parts = ", ".join(f"{k}={n}" for k, n in c.items())
        return f"{self.kind or 'plan'} [{self.mode}, tol={self.tolerance:g}]: {'PASS' if self.ok else 'FAIL'} ({parts})"

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


# ---------------------------------------------------------------------------
# exact engine


def _choi_from_columns(cols: np.ndarray, dims: tuple[int, ...], keep: Sequence[int]) -> np.ndarray:
    """rho_{X,ref} for X = ``keep`` from the d encoded basis columns.

    ``cols`` has shape (d, prod(dims)). Returns a (dX*d) x (dX*d) matrix with
    the reference index varying fastest.
    """
    d = cols.shape[0]
    n = len(dims)
    keep = list(keep)
    rest = [i for i in range(n) if i not in keep]
    t = cols.reshape((d,) + dims)
    t = np.transpose(t, [1 + i for i in keep] + [0] + [1 + i for i in rest])
    dx = int(np.prod([dims[i] for i in keep])) if keep else 1
    m = t.reshape(dx * d, -1)
    return _gram(m) / d


def _gram(m: np.ndarray) -> np.ndarray:
    """m m^dag, exploiting sparsity when the columns are mostly zero."""
    if m.size < 4_000_000:
        return m @ m.conj().T
    mt = m.T
    r_idx, a_idx = np.nonzero(mt)
    if len(r_idx) > m.size // 50:
        return m @ m.conj().T
    vals = mt[r_idx, a_idx]
    out = np.zeros((m.shape[0], m.shape[0]), dtype=complex)
    starts = np.flatnonzero(np.r_[True, r_idx[1:] != r_idx[:-1]])
    ends = np.r_[starts[1:], len(r_idx)]
    for s, e in zip(starts, ends):
        a = a_idx[s:e]
        out[np.ix_(a, a)] += np.outer(vals[s:e], vals[s:e].conj())
    return out


def _per_secret(choi: np.ndarray, d: int, psis: np.ndarray) -> np.ndarray:
    """Reduced states for each secret row of ``psis`` from rho_{X,ref}.

    rho_X(psi) = d * sum_{s,t} psi_s conj(psi_t) <s|rho_{X,ref}|t>_ref.
    """
    dx = choi.shape[0] // d
    blocks = choi.reshape(dx, d, dx, d).transpose(1, 3, 0, 2).reshape(d * d, dx * dx)
    coeff = np.einsum("ns,nt->nst", psis, psis.conj()).reshape(len(psis), d * d)
    return (d * coeff @ blocks).reshape(len(psis), dx, dx)


def _digit_classes(tree: CNode, players: frozenset[str], p: int) -> list[np.ndarray]:
    """Likelihood vectors P(class | digit value) of ``players``' view of one digit.

    Views whose likelihood rows are proportional are merged into one class.
    """
    table = digit_view_counts(tree, players, p)
    total = sum(table[0].values())
    views = sorted(set().union(*(set(c) for c in table)))
    groups: dict[tuple, np.ndarray] = {}
    for w in views:
        row = np.array([table[v].get(w, 0) for v in range(p)], dtype=float) / total
        key = tuple(np.round(row / row.sum(), 12))
        groups[key] = groups.get(key, 0) + row
    return list(groups.values())


@functools.lru_cache(maxsize=256)
def _digit_classes_cached(tree: CNode, players: frozenset[str], p: int) -> tuple[np.ndarray, ...]:
    return tuple(_digit_classes(tree, players, p))


def _tree_correct_for(tree: CNode, players: frozenset[str], p: int, label: str) -> tuple[bool, str]:
    """Exhaustive check that ``players`` rebuild every digit value on every randomness branch."""
    draws = tree_randomness_count(tree)
    if p ** (draws + 1) > EXACT_BRANCH_LIMIT:
        raise CapacityError(f"classical tree {label} has {p ** (draws + 1)} branches")
    for v in range(p):
        for rand in itertools.product(range(p), repeat=draws):
            leaves = split_tree_digit(tree, v, p, iter(rand), label)
            shares = [
                ClassicalShare(h, path, idx, (FieldElement(val, p),))
                for h, path, idx, val in leaves
                if h in players or h == PUBLIC
            ]
            try:
                got = reconstruct_tree(tree, shares, label)[0] if shares else None
            except InsufficientShares:
                got = None
            if got != v:
                return False, f"key {label} digit {v} reconstructed as {got}"
    return True, ""


class ExactEngine:
    """Choi columns of a plan for every key tuple, shared across subset checks."""

    def __init__(self, plan: SchemePlan, rng_seed: int = 0):
        self.plan = plan
        self.d = plan.d
        self.encs: list[Encrypt] = plan.keys
        self.labels = plan.layout()
        self.dims = (self.d,) * len(self.labels)
        width = self.d ** len(self.labels)
        if width > MAX_PURE_DIM:
            raise CapacityError(
                f"plan state has dimension {width} > {MAX_PURE_DIM}; use symbolic mode"
            )
        n_keys = self.d ** (2 * len(self.encs))
        self.exhaustive = n_keys <= EXACT_BRANCH_LIMIT
        if self.exhaustive:
            flat = list(itertools.product(range(self.d), repeat=2 * len(self.encs)))
        else:
            rng = np.random.default_rng(rng_seed)
            flat = [tuple(int(x) for x in rng.integers(0, self.d, 2 * len(self.encs))) for _ in range(MONTE_CARLO_SAMPLES)]
        self.key_tuples = flat
        if len(flat) * self.d * width > COLUMN_BUDGET:
            raise CapacityError(
                f"{len(flat)} key tuples x {self.d} columns x {width} amplitudes exceeds the exact budget"
            )
        self.tomo = tomographic_set(self.d)
        self.tomo_vecs = np.stack([psi.data for psi in self.tomo])
        self._columns: list[np.ndarray] | None = None

    def keys_of(self, flat: tuple[int, ...]) -> dict[str, tuple[int, int]]:
        return {e.label: (flat[2 * i], flat[2 * i + 1]) for i, e in enumerate(self.encs)}

    @property
    def columns(self) -> list[np.ndarray]:
        if self._columns is None:
            cols = []
            for flat in self.key_tuples:
                keys = self.keys_of(flat)
                cols.append(
                    np.stack([encode(self.plan, ket([s], [self.d]), keys).data for s in range(self.d)])
                )
            self._columns = cols
        return self._columns

    def positions(self, players: frozenset[str]) -> list[int]:
        return [i for i, lab in enumerate(self.labels) if lab in players]

    # -- authorized ---------------------------------------------------------

    def check_authorized(self, players: frozenset[str], tol: float) -> SubsetVerdict:
        for e in self.encs:
            if tree_obtains(e.key, players):
                ok, why = _tree_correct_for(e.key, players, self.d, e.label)
                if not ok:
                    return SubsetVerdict(players, True, RECONSTRUCTION_FAIL, 0.0, None, why)
        worst = 1.0
        for flat, cols in zip(self.key_tuples, self.columns):
            keys = self.keys_of(flat)

            def key_of(node: Encrypt, keys=keys):
                if not tree_obtains(node.key, players):
                    raise InsufficientShares(f"insufficient shares for key {node.label}")
                return keys[node.label]

            outs = []
            try:
                for s in range(self.d):
                    st = QuditState(cols[s], self.dims, self.labels, check=False)
                    st, pos = decode(self.plan, st, players, key_of)
                    outs.append(st.data)
            except InsufficientShares as exc:
                return SubsetVerdict(players, True, RECONSTRUCTION_FAIL, 0.0, None, str(exc))
            choi = _choi_from_columns(np.stack(outs), self.dims, [pos])
            rhos = _per_secret(choi, self.d, self.tomo_vecs)
            fids = np.real(np.einsum("ni,nij,nj->n", self.tomo_vecs.conj(), rhos, self.tomo_vecs))
            worst = min(worst, float(fids.min()))
        verdict = AUTHORIZED_OK if worst >= 1 - tol else RECONSTRUCTION_FAIL
        detail = "" if self.exhaustive else f"Monte-Carlo over {len(self.key_tuples)} key tuples"
        return SubsetVerdict(players, True, verdict, worst, None, detail, not self.exhaustive)

    # -- unauthorized -------------------------------------------------------

    def check_forbidden(self, players: frozenset[str], tol: float) -> SubsetVerdict:
        if not self.exhaustive:
            raise CapacityError(
                f"key space of {self.d ** (2 * len(self.encs))} tuples is too large for an exact secrecy check; "
                "use symbolic mode"
            )
        d = self.d
        pos = self.positions(players)
        chois = [_choi_from_columns(c, self.dims, pos) for c in self.columns]
        digit_classes = []
        for e in self.encs:
            cls = _digit_classes_cached(e.key, players & tree_players(e.key), d)
            digit_classes.extend([cls, cls])
        prior = 1.0 / len(self.key_tuples)
        worst = 0.0
        worst_class_gap = 0.0
        for combo in itertools.product(*digit_classes):
            acc = None
            mass = 0.0
            for idx, flat in enumerate(self.key_tuples):
                w = prior
                for g, v in zip(combo, flat):
                    w *= g[v]
                    if w == 0.0:
                        break
                if w == 0.0:
                    continue
                mass += w
                acc = chois[idx] * w if acc is None else acc + chois[idx] * w
            if acc is None:
                continue
            states = []
            for rho in _per_secret(acc, d, self.tomo_vecs):
                tr = float(np.real(np.trace(rho)))
                worst_class_gap = max(worst_class_gap, abs(tr - mass))
                states.append(rho / tr)
            worst = max(worst, _spread(states, tol))
        leaky = worst > tol or worst_class_gap > tol
        detail = "" if not leaky else f"max trace distance {worst:.3e}, classical gap {worst_class_gap:.3e}"
        return SubsetVerdict(players, False, LEAKY if leaky else FORBIDDEN_OK, None, worst, detail)

    def check(self, players: frozenset[str], claimed_authorized: bool, tol: float) -> SubsetVerdict:
        if claimed_authorized:
            return self.check_authorized(players, tol)
        return self.check_forbidden(players, tol)


def _distance(a: np.ndarray, b: np.ndarray, tol: float) -> float:
    """Trace distance, or the bound sqrt(dim)/2 * Frobenius norm when that already clears ``tol``."""
    bound = 0.5 * np.sqrt(a.shape[0]) * np.linalg.norm(a - b)
    if bound <= tol / 4:
        return float(bound)
    return trace_distance_matrices(a, b)


def _spread(states: list[np.ndarray], tol: float) -> float:
    """Largest pairwise trace distance (an upper bound of it when the states agree).

    Sets of more than 9 states use twice the largest distance to the first.
    """
    if len(states) <= 9:
        return max((_distance(a, b, tol) for a, b in itertools.combinations(states, 2)), default=0.0)
    ref = states[0]
    return min(1.0, 2 * max(_distance(ref, s, tol) for s in states[1:]))


def verify_subset_exact(
    plan: SchemePlan,
    players: Iterable[str],
    tolerance: float = 1e-9,
    engine: ExactEngine | None = None,
) -> SubsetVerdict:
    t = plan.roster.check(players)
    engine = engine or ExactEngine(plan)
    return engine.check(t, plan.claimed.is_authorized(t), tolerance)


# ---------------------------------------------------------------------------
# symbolic mode


@functools.lru_cache(maxsize=64)
def certify_qts(k: int, n: int, d: int, tol: float = 1e-9) -> bool:
    """Exact check of a bare ((k,n)) code at dimension d over all subsets."""
    plan = plain_qts(k, n, d)
    engine = ExactEngine(plan)
    return all(engine.check(t, plan.claimed.is_authorized(t), tol).ok for t in plan.roster.subsets())


@functools.lru_cache(maxsize=16)
def certify_qotp(d: int, tol: float = 1e-9) -> bool:
    """Key-averaged encryption of half a maximally entangled pair is I/d x I/d; decryption inverts."""
    omega = np.eye(d).reshape(-1) / np.sqrt(d)
    pair = QuditState(omega, (d, d), ("secret", "ref"))
    avg = qotp_key_average(pair, [0]).density()
    if np.max(np.abs(avg - np.eye(d * d) / (d * d))) > tol:
        return False
    for key in QotpKey.all_keys(d, 1):
        back = qotp_decrypt(qotp_encrypt(pair, [0], key), [0], key)
        if abs(abs(np.vdot(back.data, pair.data)) - 1) > tol:
            return False
    return True


@functools.lru_cache(maxsize=256)
def certify_key_tree(tree: CNode, p: int) -> bool:
    """Correctness and perfect secrecy of a classical tree over every subset of its players."""
    names = sorted(tree_players(tree))
    draws = tree_randomness_count(tree)
    if p ** (draws + 1) * 2 ** len(names) > 50 * EXACT_BRANCH_LIMIT:
        raise CapacityError(f"classical tree too large to certify ({p}^{draws + 1} branches, {len(names)} players)")
    for size in range(len(names) + 1):
        for combo in itertools.combinations(names, size):
            t = frozenset(combo)
            if tree_obtains(tree, t):
                if not _tree_correct_for(tree, t, p, "K")[0]:
                    return False
            else:
                table = digit_view_counts(tree, t, p)
                if any(table[v] != table[0] for v in range(1, p)):
                    return False
    return True


def certify_primitives(plan: SchemePlan, tol: float = 1e-9) -> list[str]:
    """Certify each distinct primitive of the plan exactly; returns their descriptions."""
    done = []
    for x in walk(plan.root):
        if isinstance(x, Qts):
            tag = f"(({x.k},{x.n})) d={plan.d}"
            if tag not in done:
                try:
                    ok = certify_qts(x.k, x.n, plan.d, tol)
                except CapacityError as exc:
                    raise SchemeError(f"uncertified primitive {tag}: {exc}") from exc
                if not ok:
                    raise SchemeError(f"primitive {tag} failed exact certification")
                done.append(tag)
        elif isinstance(x, Encrypt):
            tag = f"QOTP d={plan.d}"
            if tag not in done:
                if not certify_qotp(plan.d, tol):
                    raise SchemeError(f"primitive {tag} failed exact certification")
                done.append(tag)
            try:
                ok = certify_key_tree(x.key, plan.d)
            except CapacityError as exc:
                raise SchemeError(f"uncertified primitive key {x.label}: {exc}") from exc
            if not ok:
                raise SchemeError(f"key tree {x.label} failed exact certification")
            done.append(f"key {x.label}")
    return done


def _symbolic_verdict(plan: SchemePlan, t: frozenset[str]) -> SubsetVerdict:
    claimed = plan.claimed.is_authorized(t)
    got = plan.obtains(t)
    if claimed and got:
        return SubsetVerdict(t, True, AUTHORIZED_OK, 1.0, None, "symbolic")
    if not claimed and not got:
        return SubsetVerdict(t, False, FORBIDDEN_OK, None, 0.0, "symbolic")
    if got:
        return SubsetVerdict(t, False, LEAKY, None, 1.0, "symbolic: subset obtains the secret")
    return SubsetVerdict(t, True, RECONSTRUCTION_FAIL, 0.0, None, "symbolic: a layer requirement is unmet")


# ---------------------------------------------------------------------------


def exact_capable(plan: SchemePlan) -> bool:
    width = plan.d ** len(plan.layout())
    n_keys = plan.d ** (2 * len(plan.keys))
    return width <= MAX_PURE_DIM and n_keys <= EXACT_BRANCH_LIMIT and n_keys * plan.d * width <= COLUMN_BUDGET


def verify_access_structure(
    plan: SchemePlan,
    mode: str = "auto",
    tolerance: float = 1e-9,
    subsets: Sequence[Iterable[str]] | None = None,
    jobs: int = 1,
) -> VerificationReport:
    """Check every requested subset (default: all 2^n) against the plan's claim."""
    if mode not in ("exact", "symbolic", "auto"):
        raise ValueError(f"unknown mode {mode!r}")
    gamma = claimed_structure(plan.claimed)
    if not check_no_cloning(gamma):
        raise SchemeError(f"claimed structure {gamma} violates no-cloning; refusing to verify")
    if mode == "auto":
        mode = "exact" if exact_capable(plan) else "symbolic"
    todo = list(plan.roster.subsets()) if subsets is None else [plan.roster.check(s) for s in subsets]
    report = VerificationReport([], mode, tolerance, plan.kind)
    if mode == "symbolic":
        report.warnings.extend(f"certified {x}" for x in certify_primitives(plan, tolerance))
        report.verdicts = [_symbolic_verdict(plan, t) for t in todo]
        return report
    engine = ExactEngine(plan)
    engine.columns  # build once before any worker threads start

    def one(t):
        return engine.check(t, plan.claimed.is_authorized(t), tolerance)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            report.verdicts = list(pool.map(one, todo))
    else:
        report.verdicts = [one(t) for t in todo]
    if not engine.exhaustive:
        report.warnings.append(f"authorized checks sampled {len(engine.key_tuples)} key tuples")
    return report

