"""Command-line front end: scheme configs, deal transcripts, verification and demos.

Exit codes: 0 success, 1 verification or reconstruction failure, 2 usage or
config error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .access_structure import PlayerRoster, fmt_set, minimize
from .classical_sharing import ClassicalShare, FieldElement
from .errors import CapacityError, HybridQssError, InsufficientShares, SchemeError
from .homogenizer import (
    Scheme3Deal,
    Scheme3Plan,
    build_scheme3,
    eta_for_delta,
    homogenize,
    marginal_profile,
    ordering_sweep,
    scheme3_deal,
    scheme3_reconstruct,
    verify_scheme3,
)
from .hybrid_protocols import (
    Deal,
    SchemePlan,
    TwinThresholdDescriptor,
    build_q2ts,
    build_q2ts_c,
    compress_general,
    compress_threshold,
    deal,
    inflate,
    inflate_qts_conformal,
    plain_qts,
    reconstruct,
)
from .qts_codes import QtsCode, codeword
from .quantum_sim import (
    QuditState,
    fidelity,
    haar_random_state,
    ket,
    maximally_mixed,
    partial_trace,
    tomographic_set,
    trace_distance,
)
from .verifier import verify_access_structure

KINDS = ("threshold-compress", "general-compress", "inflate", "q2ts", "q2ts+c", "scheme3", "plain-qts")
DEMOS = ("eq1-code", "eq2-compression", "thm2-inflation", "scheme1", "scheme2", "scheme3", "homogenize")


class ConfigError(HybridQssError, ValueError):
    """A config or transcript file that cannot be turned into a plan."""


# ---------------------------------------------------------------------------
# complex arrays as [re, im] pairs


def complex_to_json(arr: np.ndarray) -> list:
    arr = np.asarray(arr, dtype=complex)
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def complex_from_json(obj) -> np.ndarray:
    a = np.asarray(obj, dtype=float)
    if a.shape[-1] != 2:
        raise ConfigError("complex values must be [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


def state_to_json(state: QuditState) -> dict:
    return {
        "dims": list(state.dims),
        "labels": list(state.labels),
        "pure": state.is_pure,
        "data": complex_to_json(state.data),
    }


def state_from_json(obj: dict, check: bool = True) -> QuditState:
    return QuditState(complex_from_json(obj["data"]), obj["dims"], obj["labels"], check=check)


def share_to_json(s: ClassicalShare) -> dict:
    return {
        "holder": s.holder,
        "label": s.label,
        "index": s.index,
        "modulus": s.modulus,
        "payload": [e.value for e in s.payload],
    }


def share_from_json(obj: dict) -> ClassicalShare:
    p = obj["modulus"]
    return ClassicalShare(obj["holder"], obj["label"], obj["index"], tuple(FieldElement(v, p) for v in obj["payload"]))


# ---------------------------------------------------------------------------
# scheme configs


def _need(cfg: dict, key: str, where: str):
    if key not in cfg:
        raise ConfigError(f"{where}: missing field {key!r}")
    return cfg[key]


def roster_from_config(cfg: dict, where: str = "config") -> PlayerRoster | None:
    players = cfg.get("players")
    if players is None:
        return None
    names, quantum = [], []
    for i, p in enumerate(players):
        if isinstance(p, str):
            names.append(p)
            quantum.append(p)
            continue
        if "name" not in p:
            raise ConfigError(f"{where}: players[{i}] has no name")
        names.append(p["name"])
        if p.get("quantum", False):
            quantum.append(p["name"])
    try:
        return PlayerRoster(names, quantum)
    except ValueError as exc:
        raise ConfigError(f"{where}.players: {exc}") from exc


def _sets(cfg: dict, key: str, where: str) -> list[list[str]]:
    sets = _need(cfg, key, where)
    return [list(s) if isinstance(s, list) else list(s) for s in sets]


@dataclass
class SchemeConfig:
    kind: str
    params: dict
    seed: int = 0

    @classmethod
    def from_json(cls, obj: dict, where: str = "config") -> "SchemeConfig":
        if not isinstance(obj, dict):
            raise ConfigError(f"{where}: expected a JSON object")
        kind = obj.get("kind")
        if kind not in KINDS:
            raise ConfigError(f"{where}.kind: {kind!r} is not one of {', '.join(KINDS)}")
        seed = obj.get("seed", 0)
        if not isinstance(seed, int) or seed < 0:
            raise ConfigError(f"{where}.seed: must be a nonnegative integer")
        params = {k: v for k, v in obj.items() if k not in ("kind", "seed")}
        return cls(kind, params, seed)

    def to_json(self) -> dict:
        return {"kind": self.kind, "seed": self.seed, **self.params}

    def build(self, where: str = "config") -> SchemePlan | Scheme3Plan:
        try:
            return _build(self.kind, self.params, where)
        except ConfigError:
            raise
        except (SchemeError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"{where} ({self.kind}): {exc}") from exc


def _build(kind: str, cfg: dict, where: str) -> SchemePlan | Scheme3Plan:
    roster = roster_from_config(cfg, where)
    d = cfg.get("d")
    if kind == "plain-qts":
        return plain_qts(_need(cfg, "k", where), _need(cfg, "n", where), d, roster)
    if kind == "threshold-compress":
        return compress_threshold(_need(cfg, "k", where), _need(cfg, "n", where), d, roster)
    if kind == "general-compress":
        if roster is None:
            raise ConfigError(f"{where}: general-compress needs players")
        gamma = minimize(roster, _sets(cfg, "gamma", where))
        return compress_general(
            gamma,
            d,
            cfg.get("w_max", 3),
            cfg.get("hitting_set"),
            cfg.get("completion"),
            cfg.get("promote_completion", False),
        )
    if kind == "inflate":
        if "base" in cfg:
            base = SchemeConfig.from_json(cfg["base"], f"{where}.base").build(f"{where}.base")
            if not isinstance(base, SchemePlan):
                raise ConfigError(f"{where}.base: cannot inflate a {base.kind} plan")
            new = roster_from_config({"players": _need(cfg, "new_players", where)}, f"{where}.new_players")
            if new.quantum_capable:
                raise ConfigError(f"{where}.new_players: inflation adds c-players only")
            return inflate(base, new.names, _sets(cfg, "gamma_prime", where))
        return inflate_qts_conformal(_need(cfg, "k", where), _need(cfg, "n", where), _need(cfg, "gamma", where), d, roster)
    if roster is None:
        raise ConfigError(f"{where}: {kind} needs players")
    common = frozenset(cfg.get("common_set", ()))
    if kind in ("q2ts", "q2ts+c"):
        desc = TwinThresholdDescriptor(roster, _need(cfg, "k_c", where), _need(cfg, "k_q", where), common)
        if kind == "q2ts":
            if common:
                raise ConfigError(f"{where}: q2ts takes no common_set; use q2ts+c")
            return build_q2ts(desc, d)
        return build_q2ts_c(desc, d, cfg.get("variant", "all-common"))
    xi = None
    if "xi" in cfg:
        xi = QuditState(complex_from_json(cfg["xi"]), (2,))
    return build_scheme3(
        roster,
        _need(cfg, "k_c", where),
        common,
        _need(cfg, "m", where),
        cfg.get("eta"),
        cfg.get("delta", 0.05),
        xi,
        cfg.get("N"),
    )


def load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def plan_dimension(plan: SchemePlan | Scheme3Plan) -> int:
    return 2 if isinstance(plan, Scheme3Plan) else plan.d


def config_secret(cfg: SchemeConfig, plan) -> QuditState:
    """The secret named in the config, else a Haar-random one from the seed."""
    d = plan_dimension(plan)
    if "secret" in cfg.params:
        vec = complex_from_json(cfg.params["secret"])
        if vec.shape != (d,):
            raise ConfigError(f"config.secret: expected {d} amplitudes, got {vec.shape}")
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise ConfigError("config.secret: zero vector")
        return QuditState(vec / norm, (d,), ["secret"])
    return haar_random_state(d, np.random.default_rng([cfg.seed, 1]), "secret")


# ---------------------------------------------------------------------------
# transcripts


@dataclass
class Transcript:
    config: SchemeConfig
    dealt: Deal | Scheme3Deal
    report: dict | None = None
    version: str = __version__

    @property
    def seed(self) -> int:
        return self.config.seed

    def to_json(self) -> dict:
        dl = self.dealt
        out = {
            "tool": "hybridqss",
            "version": self.version,
            "seed": self.seed,
            "config": self.config.to_json(),
            "deal": {
                "global_state": state_to_json(dl.global_state),
                "classical_shares": [share_to_json(s) for s in dl.classical_shares],
                "randomness": dl.randomness_record,
                "secret": state_to_json(dl.secret_snapshot),
            },
        }
        if isinstance(dl, Scheme3Deal):
            out["deal"]["ordering"] = list(dl.ordering)
        if self.report is not None:
            out["report"] = self.report
        return out

    @classmethod
    def from_json(cls, obj: dict, where: str = "transcript") -> "Transcript":
        try:
            cfg = SchemeConfig.from_json(obj["config"], f"{where}.config")
            plan = cfg.build(f"{where}.config")
            body = obj["deal"]
            state = state_from_json(body["global_state"], check=False)
            shares = tuple(share_from_json(s) for s in body["classical_shares"])
            secret = state_from_json(body["secret"], check=False)
            if isinstance(plan, Scheme3Plan):
                dl = Scheme3Deal(plan, state, shares, body["randomness"], secret, tuple(body.get("ordering", ())))
            else:
                dl = Deal(plan, state, shares, body["randomness"], secret)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{where}: malformed transcript ({exc})") from exc
        return cls(cfg, dl, obj.get("report"), obj.get("version", ""))


def run_deal(cfg: SchemeConfig) -> Deal | Scheme3Deal:
    plan = cfg.build()
    secret = config_secret(cfg, plan)
    if isinstance(plan, Scheme3Plan):
        return scheme3_deal(plan, secret, seed=cfg.seed)
    return deal(plan, secret, seed=cfg.seed)


def replay_mismatch(tr: Transcript) -> str | None:
    """Replay config+seed; describe the first difference from the recorded deal, or None."""
    fresh = run_deal(tr.config)
    old = tr.dealt
    if fresh.global_state.dims != old.global_state.dims or fresh.global_state.labels != old.global_state.labels:
        return "qudit layout differs from replay"
    if fresh.global_state.data.shape != old.global_state.data.shape:
        return "state representation differs from replay"
    diff = float(np.max(np.abs(fresh.global_state.data - old.global_state.data)))
    if diff > 1e-12:
        return f"quantum state differs from replay by {diff:.3e}"
    if [share_to_json(s) for s in fresh.classical_shares] != [share_to_json(s) for s in old.classical_shares]:
        return "classical shares differ from replay"
    if fresh.randomness_record.get("draws") != old.randomness_record.get("draws"):
        return "randomness record differs from replay"
    if np.max(np.abs(fresh.secret_snapshot.data - old.secret_snapshot.data)) > 1e-12:
        return "secret differs from replay"
    return None


def verify_plan(plan, mode: str, tolerance: float, jobs: int = 1, leak_budget: float | None = None):
    if isinstance(plan, Scheme3Plan):
        if mode == "symbolic":
            raise ConfigError("scheme3 plans have no symbolic verification")
        return verify_scheme3(plan, tolerance, leak_budget)
    return verify_access_structure(plan, mode, tolerance, jobs=jobs)


def reconstruct_any(dl, players) -> QuditState:
    if isinstance(dl, Scheme3Deal):
        return scheme3_reconstruct(dl, players)
    return reconstruct(dl, players)


# ---------------------------------------------------------------------------
# commands


def _parse_players(text: str) -> list[str]:
    parts = [p.strip() for p in text.replace(" ", ",").split(",")]
    return [p for p in parts if p]


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _write_report(report, prefix: str | None) -> None:
    if prefix:
        Path(prefix + ".report.txt").write_text(report.to_tsv())
        Path(prefix + ".report.json").write_text(report.dumps() + "\n")


def cmd_plan(args) -> int:
    cfg = SchemeConfig.from_json(load_json(args.config), args.config)
    plan = cfg.build(args.config)
    print(plan.render())
    if isinstance(plan, SchemePlan):
        print(f"d = {plan.d}, q-players used = {plan.q_player_count()}")
        print(f"claimed: {plan.claimed}")
        for note in plan.notes:
            print(f"note: {note}")
    else:
        print(f"claimed: {plan.claimed}")
    return 0


def cmd_deal(args) -> int:
    obj = load_json(args.config)
    if args.seed is not None:
        obj["seed"] = args.seed
    cfg = SchemeConfig.from_json(obj, args.config)
    tr = Transcript(cfg, run_deal(cfg))
    _write(args.out, json.dumps(tr.to_json()) + "\n")
    if args.out and args.out != "-":
        print(f"wrote {args.out} (seed {cfg.seed})")
    return 0


def cmd_reconstruct(args) -> int:
    tr = Transcript.from_json(load_json(args.transcript), args.transcript)
    players = _parse_players(args.players)
    try:
        out = reconstruct_any(tr.dealt, players)
    except InsufficientShares as exc:
        print(f"{fmt_set(players)}: {exc}")
        return 1
    f = fidelity(tr.dealt.secret_snapshot, out)
    ok = f >= 1 - args.tolerance
    print(f"{fmt_set(players)}: fidelity {f:.12f} ({'ok' if ok else 'FAIL'})")
    return 0 if ok else 1


def cmd_verify(args) -> int:
    obj = load_json(args.target)
    if "deal" in obj:
        tr = Transcript.from_json(obj, args.target)
        why = replay_mismatch(tr)
        if why is not None:
            print(f"transcript integrity check failed: {why}")
            return 1
        plan = tr.dealt.plan
    else:
        plan = SchemeConfig.from_json(obj, args.target).build(args.target)
    report = verify_plan(plan, args.mode, args.tolerance, args.jobs, args.leak_budget)
    print(report.summary())
    for w in report.warnings:
        print(f"warning: {w}")
    if args.verbose:
        sys.stdout.write(report.to_tsv())
    _write_report(report, args.report)
    return 0 if report.ok else 1


# ---------------------------------------------------------------------------
# demos


def _ket_str(vec: np.ndarray, dims: Sequence[int], tol: float = 1e-12) -> str:
    terms = []
    for idx in np.flatnonzero(np.abs(vec) > tol):
        digits = np.unravel_index(idx, dims)
        terms.append("|" + "".join(str(x) for x in digits) + ">")
    amp = abs(vec[np.flatnonzero(np.abs(vec) > tol)[0]])
    return f"{amp:.4f} ({' + '.join(terms)})"


def demo_eq1(args) -> int:
    code = QtsCode(2, 3, 3)
    for s in range(3):
        w = codeword(code, s)
        print(f"|{s}> -> {_ket_str(w.data, w.dims)}")
    worst = 0.0
    for psi in tomographic_set(3):
        from .qts_codes import qts_encode

        enc = qts_encode(psi.relabel(["secret"]), code)
        for i in range(3):
            worst = max(worst, trace_distance(partial_trace(enc, [i]), maximally_mixed(3)))
    ok = worst <= args.tolerance
    print(f"single-share distance from I/3 over the tomographic set: {worst:.3e} ({'ok' if ok else 'FAIL'})")
    return 0 if ok else 1


def _report_line(report) -> int:
    print(report.summary())
    for w in report.warnings:
        print(f"  {w}")
    return 0 if report.ok else 1


def demo_eq2(args) -> int:
    roster = PlayerRoster("ABCDEF", "ACE")
    gamma = minimize(roster, ["ABCD", "ADF", "CDE"])
    plan = compress_general(gamma, hitting_set="AE", promote_completion=True)
    print(f"Gamma = {gamma}, q-players {fmt_set(roster.quantum_capable)}")
    print(plan.render())
    for note in plan.notes:
        print(f"note: {note}")
    report = verify_access_structure(plan, "symbolic", args.tolerance)
    auth = sorted(fmt_set(v.subset) for v in report.verdicts if v.claimed_authorized and v.ok)
    print(f"authorized subsets: {len(auth)}")
    return _report_line(report)


def demo_thm2(args) -> int:
    base = plain_qts(2, 3)
    plan = inflate(base, ["X"], [["P1", "P2", "X"], ["P1", "P3", "X"], ["P2", "P3", "X"]])
    print(plan.render())
    print(f"claimed: {plan.claimed}")
    rc = _report_line(verify_access_structure(plan, args.mode, args.tolerance, jobs=args.jobs))
    conf = inflate_qts_conformal(2, 3, 1)
    print(conf.render())
    print(f"claimed: {conf.claimed}")
    return max(rc, _report_line(verify_access_structure(conf, args.mode, args.tolerance, jobs=args.jobs)))


def demo_scheme1(args) -> int:
    roster = PlayerRoster(["P1", "P2", "P3", "P4"], ["P1", "P2", "P3"])
    plan = build_q2ts(TwinThresholdDescriptor(roster, 1, 2))
    print(f"claimed: {plan.claimed}")
    print(plan.render())
    return _report_line(verify_access_structure(plan, args.mode, args.tolerance, jobs=args.jobs))


def demo_scheme2(args) -> int:
    roster = PlayerRoster([f"P{i}" for i in range(1, 7)], ["P1", "P2", "P3"])
    plan = build_q2ts_c(TwinThresholdDescriptor(roster, 1, 3, frozenset(["P1"])))
    print(f"claimed: {plan.claimed}")
    print(plan.render())
    return _report_line(verify_access_structure(plan, args.mode, args.tolerance, jobs=args.jobs))


def demo_scheme3(args) -> int:
    roster = PlayerRoster(["P1", "P2"], ["P1", "P2"])
    plan = build_scheme3(roster, 0, ["P1", "P2"], [2, 2])
    print(plan.render())
    secret = haar_random_state(2, np.random.default_rng([args.seed, 1]))
    dl = scheme3_deal(plan, secret, seed=args.seed)
    rc = 0
    f = fidelity(secret, scheme3_reconstruct(dl, ["P1", "P2"]))
    print(f"{{P1,P2}}: fidelity {f:.12f}")
    if f < 1 - args.tolerance:
        rc = 1
    for t in (["P1"], ["P2"]):
        try:
            scheme3_reconstruct(dl, t)
            print(f"{fmt_set(t)}: unexpectedly reconstructed")
            rc = 1
        except InsufficientShares as exc:
            print(f"{fmt_set(t)}: {exc}")
    return max(rc, _report_line(verify_scheme3(plan, args.tolerance, args.leak_budget)))


def homogenize_tables(delta: float, n_max: int, eta_sweep: float, n_sweep: int, seed: int):
    rho, xi = ket([0], [2]), ket([1], [2])
    eta = eta_for_delta(delta)
    rows = []
    for n in range(1, n_max + 1):
        run = homogenize(rho, xi, n, eta)
        rows.append((n, run.system_distance(), max(run.reservoir_distances())))
    profile = marginal_profile(rho, xi, eta, 100_000)
    rng = np.random.default_rng(seed)
    r2, x2 = haar_random_state(2, rng), haar_random_state(2, rng)
    true = tuple(int(x) for x in rng.permutation(n_sweep + 1))
    run = homogenize(r2, x2, n_sweep, eta_sweep, true)
    sweep = ordering_sweep(run)
    return eta, rows, profile.first_n(delta), true, sweep


def demo_homogenize(args) -> int:
    delta, n_max = args.delta, args.n_max
    eta, rows, first_any, true, sweep = homogenize_tables(delta, n_max, math.pi / 7, 4, args.seed)
    print(f"delta={delta:g} eta={eta:.6f} rho=|0> xi=|1>")
    print(f"{'N':>3}  {'D(rho_S,xi)':>12}  {'max D(xi_k,xi)':>14}")
    for n, ds, dr in rows:
        print(f"{n:>3}  {ds:>12.6f}  {dr:>14.6f}")
    hit = next((n for n, ds, dr in rows if ds <= delta and dr <= delta), None)
    print(f"first N <= {n_max} within delta: {hit if hit is not None else 'none'}")
    print(f"first N from the exact marginal map: {first_any}")
    fids = np.array([f for _, f in sweep])
    good = [p for p, f in sweep if f >= 1 - 1e-6]
    wrong = np.array([f for p, f in sweep if p != true])
    print(f"orderings at N=4, eta=pi/7: {len(sweep)}; fidelity >= 1-1e-6: {len(good)} (true ordering {list(true)})")
    print(f"wrong orderings: mean {wrong.mean():.4f}, max {wrong.max():.4f}")
    counts, edges = np.histogram(fids, bins=10, range=(0.0, 1.0))
    for c, lo, hi in zip(counts, edges[:-1], edges[1:]):
        print(f"  [{lo:.1f},{hi:.1f}) {c:>4} {'#' * int(c)}")
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "homogenize_table.tsv").write_text(
            "N\tD_system\tmax_D_reservoir\n" + "".join(f"{n}\t{a:.12g}\t{b:.12g}\n" for n, a, b in rows)
        )
        (out / "ordering_fidelities.tsv").write_text(
            "ordering\tfidelity\n" + "".join(f"{' '.join(map(str, p))}\t{f:.15g}\n" for p, f in sweep)
        )
        print(f"wrote {out / 'homogenize_table.tsv'} and {out / 'ordering_fidelities.tsv'}")
    return 0


DEMO_FUNCS = {
    "eq1-code": demo_eq1,
    "eq2-compression": demo_eq2,
    "thm2-inflation": demo_thm2,
    "scheme1": demo_scheme1,
    "scheme2": demo_scheme2,
    "scheme3": demo_scheme3,
    "homogenize": demo_homogenize,
}


def cmd_demo(args) -> int:
    return DEMO_FUNCS[args.name](args)


# ---------------------------------------------------------------------------
# entry point


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # subcommand copies suppress their defaults so flags given before the subcommand survive
    def dflt(v):
        return argparse.SUPPRESS if suppress else v

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=dflt(None), help="rng seed (overrides the config)")
    common.add_argument("--tolerance", type=float, default=dflt(1e-9))
    common.add_argument("--mode", choices=("exact", "symbolic", "auto"), default=dflt("auto"))
    common.add_argument("--jobs", type=int, default=dflt(1), help="worker threads for subset checks")
    common.add_argument(
        "--leak-budget", type=float, default=dflt(None), help="max trace distance tolerated for scheme3 forbidden subsets"
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    top, common = _global_flags(False), _global_flags(True)
    ap = argparse.ArgumentParser(prog="hybridqss", description="Hybrid quantum/classical secret sharing toolkit", parents=[top])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", parents=[common], help="print the layer tree of a scheme config")
    p.add_argument("config")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("deal", parents=[common], help="deal a secret and write a transcript")
    p.add_argument("config")
    p.add_argument("-o", "--out", default=None, help="transcript path (default stdout)")
    p.set_defaults(func=cmd_deal)

    p = sub.add_parser("reconstruct", parents=[common], help="reconstruct from a transcript for a player subset")
    p.add_argument("transcript")
    p.add_argument("players", help="comma-separated player names")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("verify", parents=[common], help="verify a config or transcript against its claimed structure")
    p.add_argument("target")
    p.add_argument("--report", default=None, help="write PREFIX.report.txt and PREFIX.report.json")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("demo", parents=[common], help="run a named worked example")
    p.add_argument("name", choices=DEMOS)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--n-max", type=int, default=14)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("homogenize-demo", parents=[common], help="convergence table and wrong-ordering histogram")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--n-max", type=int, default=14)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=demo_homogenize)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command not in ("deal",) and args.seed is None:
        args.seed = 0
    try:
        return args.func(args)
    except (ConfigError, SchemeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"error: {exc} (try --mode symbolic)", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
