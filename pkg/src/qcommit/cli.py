"""Command-line driver: one subcommand per verification suite.

Every run writes a report ``{version, config, results, assertions}`` (JSON)
or, for ``oracle-scaling --format csv``, a CSV table.  Exit status is 0 when
all assertions pass, 1 when one fails and 2 on a usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import instances as inst_mod
from . import oraclegame as og
from . import schemes
from .channels import Channel, Z
from .linalg import purify, random_density, random_state
from .norms import diamond_lower, fidelity_sum_opt, fvdg_bounds, marginal_fidelity

SUBCOMMANDS = ("norms-suite", "qsd-scheme", "qcd-scheme", "repetition", "pi-scheme",
               "orthogonalize", "oracle-protocol", "oracle-scaling")

DEFAULTS = {"seed": 0, "qubits": 2, "d": None, "m": 4, "k": 2, "mu": 1e-6,
            "restarts": 16, "samples": None, "out": None, "format": "json"}

# (low, high) inclusive caps; None means unchecked
CAPS = {"qubits": (1, 5), "d": (1, 8), "m": (0, 12), "k": (1, 3), "mu": (0.0, 0.1),
        "restarts": (1, 256), "samples": (4, 1_000_000), "seed": (0, 2 ** 32 - 1)}

SAMPLE_DEFAULTS = {"norms-suite": 1000, "orthogonalize": 200, "oracle-scaling": 10000,
                   "oracle-protocol": 50}


class UsageError(Exception):
    pass


class Report:
    def __init__(self):
        self.results: list = []
        self.assertions: list = []

    def check(self, name: str, ok: bool, value=None, bound=None):
        self.assertions.append({"name": name, "pass": bool(ok), "value": value, "bound": bound})

    @property
    def passed(self) -> bool:
        return all(a["pass"] for a in self.assertions)


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

def run_norms(cfg, rep: Report):
    rng = np.random.default_rng(cfg["seed"])
    n = cfg["samples"]
    worst = np.inf
    for _ in range(n):
        d = int(rng.integers(2, 9))
        lo, mid, hi = fvdg_bounds(random_density(d, rng), random_density(d, rng))
        worst = min(worst, mid - lo, hi - mid)
    rep.results.append({"suite": "fvdg", "pairs": n, "min_slack": float(worst)})
    rep.check("fvdg_ordering", worst >= -1e-9, float(worst), -1e-9)

    n_sum = min(n, 200)
    gap = 0.0
    for _ in range(n_sum):
        d = int(rng.integers(2, 9))
        r = fidelity_sum_opt(random_density(d, rng), random_density(d, rng),
                             seed=int(rng.integers(2 ** 31)))
        gap = max(gap, abs(r.value - r.target))
    rep.results.append({"suite": "fidelity_sum", "pairs": n_sum, "max_gap": gap})
    rep.check("fidelity_sum_optimum", gap <= 1e-6, gap, 1e-6)

    est = diamond_lower(Channel.identity(2), Channel.unitary(Z), cfg["restarts"], cfg["seed"])
    rep.results.append({"suite": "diamond", "pair": "identity vs Z", **est.to_json()})
    rep.check("diamond_identity_vs_z", abs(est.lower_bound - 2) <= 1e-9, est.lower_bound, 2.0)


def run_qsd(cfg, rep: Report):
    q, seed, mu = cfg["qubits"], cfg["seed"], cfg["mu"]
    variants = [False, True] if q >= 2 else [False]
    for ent in variants:
        inst = inst_mod.gen_qsd("Y", q, ent, seed, mu=mu)
        honest = [schemes.qsd_round(inst, b, seed).accept_probability for b in (0, 1)]
        cheat = schemes.qsd_optimal_cheat(inst, seed=seed)
        tag = f"Y_q{q}_garbage{int(ent)}"
        rep.results.append({"instance": tag, "honest": honest, "cheat": cheat.to_json()})
        rep.check(f"{tag}_honest", min(honest) >= 1 - 1e-9, min(honest), 1.0)
        rep.check(f"{tag}_optimum", abs(cheat.average - cheat.extra["optimum"]) <= 1e-6,
                  cheat.average, cheat.extra["optimum"])
        rep.check(f"{tag}_bound", cheat.within_bound, cheat.average, cheat.analytic_bound)
    n_inst = inst_mod.gen_qsd("N", q, seed=seed, mu=mu)
    dist = schemes.qsd_hiding_distance(n_inst)
    rep.results.append({"instance": f"N_q{q}", "hiding_distance": dist})
    rep.check("N_statistical_hiding", dist <= mu, dist, mu)
    pure = schemes.qsd_optimal_cheat(inst_mod.qsd_pure_pair(np.pi / 3), seed=seed)
    rep.results.append({"instance": "pure_pi_over_3", "cheat": pure.to_json()})
    rep.check("pure_pi_over_3", abs(pure.average - 0.75) <= 1e-6, pure.average, 0.75)


def run_qcd(cfg, rep: Report):
    q, seed, mu, restarts = min(cfg["qubits"], 3), cfg["seed"], cfg["mu"], cfg["restarts"]
    cases = [("ideal", inst_mod.ideal_qcd(mu)),
             (f"Y_q{q}", inst_mod.gen_qcd("Y", q, seed, mu=mu)),
             (f"Y_q{q}_discards", inst_mod.gen_qcd("Y", q, seed, discards=True, mu=mu))]
    for tag, inst in cases:
        adv = schemes.qcd_advice(inst, seed=seed)
        honest = [schemes.qcd_round(inst, b, adv, seed=seed).accept_probability for b in (0, 1)]
        cheat = schemes.qcd_single_round_cheat(inst, adv, restarts, seed)
        rep.results.append({"instance": tag, "honest": honest, "cheat": cheat.to_json()})
        rep.check(f"{tag}_honest", min(honest) >= 1 - 1e-9, min(honest), 1.0)
        rep.check(f"{tag}_bound", cheat.within_bound, cheat.average, cheat.analytic_bound)
        if cheat.extra["orthogonal_commitments"]:
            rep.check(f"{tag}_attains_three_quarters", cheat.average >= 0.75 - 1e-3,
                      cheat.average, 0.75 - 1e-3)


def run_repetition(cfg, rep: Report):
    k, seed, mu, restarts = cfg["k"], cfg["seed"], cfg["mu"], cfg["restarts"]
    inst = inst_mod.ideal_qcd(mu)
    adv = schemes.qcd_advice(inst, seed=seed)
    cheat, attack = schemes.repetition_cheat(inst, k, adv, restarts, seed)
    rep.results.append({"instance": "ideal", "k": k, "cheat": cheat.to_json()})
    rep.check("full_bound", cheat.within_bound, cheat.average, cheat.analytic_bound)
    ideal = cheat.extra["ideal_bound"]
    rep.check("ideal_bound", cheat.average <= ideal + 1e-6, cheat.average, ideal)
    rep.check("equal_commit_marginals", attack.marginal_gap() <= 1e-9, attack.marginal_gap(), 1e-9)


def run_pi(cfg, rep: Report):
    d = cfg["d"] or 2
    d = min(d, 4)
    seed, mu, restarts = cfg["seed"], cfg["mu"], cfg["restarts"]
    y = inst_mod.gen_pi("Y", (d, d), seed, mu=mu)
    msgs = [schemes.pi_commit(y, b)[1] for b in (0, 1)]
    gap = float(np.abs(msgs[0] - msgs[1]).max())
    honest = [schemes.pi_round(y, b, seed).accept_probability for b in (0, 1)]
    rep.results.append({"instance": f"Y_{d}x{d}", "hiding_gap": gap, "honest": honest})
    rep.check("perfect_hiding", gap <= 1e-10, gap, 1e-10)
    rep.check("honest_acceptance", min(honest) >= 1 - 1e-9, min(honest), 1.0)
    n = inst_mod.gen_pi("N", (d, d), seed, mu=mu, restarts=restarts)
    avg, ok, _ = schemes.pi_witness_search(n, restarts, seed)
    rep.results.append({"instance": f"N_{d}x{d}", "searched_average": avg, "constraint_ok": ok})
    rep.check("N_witness_constraint", ok, None, None)
    rep.check("N_searched_average", avg <= 0.5 + mu + 1e-3, avg, 0.5 + mu + 1e-3)


def run_orthogonalize(cfg, rep: Report):
    rng = np.random.default_rng(cfg["seed"])
    worst_fid, worst_slack = 0.0, np.inf
    for _ in range(cfg["samples"]):
        phi0, phi1 = near_orthogonal_pair(rng)
        a, b, eps = schemes.orthogonalize(phi0, phi1, (4, 4))
        worst_fid = max(worst_fid, marginal_fidelity(a, b, (4, 4)))
        for new, old in ((a, phi0), (b, phi1)):
            worst_slack = min(worst_slack, abs(np.vdot(new, old)) - (1 - eps))
    rep.results.append({"pairs": cfg["samples"], "max_fidelity": worst_fid,
                        "min_overlap_slack": float(worst_slack)})
    rep.check("orthogonal_outputs", worst_fid <= 1e-9, worst_fid, 1e-9)
    rep.check("overlap_bound", worst_slack >= -1e-8, float(worst_slack), -1e-8)
    p0 = purify(np.diag([0.99, 0.01]), 2)
    p1 = purify(np.diag([0.01, 0.99]), 2)
    a, _, eps = schemes.orthogonalize(p0, p1, (2, 2))
    ov = abs(np.vdot(a, p0))
    rep.results.append({"example": "diag(0.99, 0.01)", "overlap": ov, "epsilon": eps})
    rep.check("diag_example_overlap", abs(ov - np.sqrt(0.99)) <= 1e-9, ov, float(np.sqrt(0.99)))


def near_orthogonal_pair(rng, da: int = 4, db: int = 4, noise: float = 0.05):
    """Two purifications on A ⊗ B whose A marginals are nearly orthogonal."""
    half = da // 2
    out = []
    for block in (slice(0, half), slice(half, da)):
        m = np.zeros((da, db), dtype=complex)
        m[block] = random_state(half * db, rng).reshape(half, db)
        m += noise * rng.uniform() * random_state(da * db, rng).reshape(da, db)
        out.append((m / np.linalg.norm(m)).reshape(-1))
    return out[0], out[1]


def run_oracle_protocol(cfg, rep: Report):
    ds = [cfg["d"]] if cfg["d"] else [2, 4, 8]
    rng = np.random.default_rng(cfg["seed"])
    for d in ds:
        honest = []
        for _ in range(cfg["samples"]):
            u = og.haar_unitary(d, int(rng.integers(2 ** 31)))
            honest.append(og.protocol_accept(1, u, og.honest_prover(u, d), d))
        ident = og.protocol_accept(2, None, Channel.identity(2 * d), d)
        searched, _ = og.search_prover(2, None, d, cfg["restarts"], cfg["seed"])
        rep.results.append({"d": d, "honest_min": min(honest), "identity_kind2": ident,
                            "searched_kind2": searched})
        rep.check(f"d{d}_honest", min(honest) >= 1 - 1e-9, min(honest), 1.0)
        rep.check(f"d{d}_identity_half", abs(ident - 0.5) <= 1e-9, ident, 0.5)
        rep.check(f"d{d}_searched_sound", searched <= 0.5 + 1e-9, searched, 0.5 + 1e-9)


def run_oracle_scaling(cfg, rep: Report):
    ds = [cfg["d"]] if cfg["d"] else [2, 4, 8]
    rows = og.scaling_sweep(ds, range(cfg["m"] + 1), cfg["samples"], cfg["seed"])
    for row in rows:
        rep.results.append(row)
        rep.check(f"d{row['d']}_m{row['m']}_envelope", row["estimate"] <= row["envelope"],
                  row["estimate"], row["envelope"])
        if row["m"] == 0:
            rep.check(f"d{row['d']}_uniform_zero", row["estimate"] <= 3 * row["std_error"],
                      row["estimate"], 3 * row["std_error"])


SUITES = {"norms-suite": run_norms, "qsd-scheme": run_qsd, "qcd-scheme": run_qcd,
          "repetition": run_repetition, "pi-scheme": run_pi,
          "orthogonalize": run_orthogonalize, "oracle-protocol": run_oracle_protocol,
          "oracle-scaling": run_oracle_scaling}


# ---------------------------------------------------------------------------
# Plumbing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qcommit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON file with flag values")
        s.add_argument("--seed", type=int)
        s.add_argument("--qubits", type=int)
        s.add_argument("--d", type=int)
        s.add_argument("--m", type=int)
        s.add_argument("--k", type=int)
        s.add_argument("--mu", type=float)
        s.add_argument("--restarts", type=int)
        s.add_argument("--samples", type=int)
        s.add_argument("--out")
        s.add_argument("--format", choices=("json", "csv"))
        s.add_argument("--timing", action="store_true", help="include wall-clock runtime")
    return p


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if cfg["samples"] is None:
        cfg["samples"] = SAMPLE_DEFAULTS.get(args.subcommand, 100)
    for key, (lo, hi) in CAPS.items():
        val = cfg[key]
        if val is not None and not lo <= val <= hi:
            raise UsageError(f"--{key} must be in [{lo}, {hi}], got {val}")
    if cfg["format"] == "csv" and args.subcommand != "oracle-scaling":
        raise UsageError("CSV output is only available for oracle-scaling")
    cfg["subcommand"] = args.subcommand
    return cfg


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"cannot serialise {type(x)}")


def render(cfg: dict, rep: Report, runtime: float | None) -> str:
    if cfg["format"] == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(og.CSV_HEADER)
        for row in rep.results:
            w.writerow([repr(float(row[h])) if isinstance(row[h], float) else row[h]
                        for h in og.CSV_HEADER])
        return buf.getvalue()
    doc = {"version": __version__, "config": cfg, "results": rep.results,
           "assertions": rep.assertions}
    if runtime is not None:
        doc["runtime_seconds"] = runtime
    return json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n"


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
    except UsageError as exc:
        print(f"qcommit: error: {exc}", file=sys.stderr)
        return 2
    rep = Report()
    start = time.perf_counter()
    SUITES[cfg["subcommand"]](cfg, rep)
    runtime = time.perf_counter() - start if args.timing else None
    text = render(cfg, rep, runtime)
    if cfg["out"]:
        try:
            Path(cfg["out"]).write_text(text)
        except OSError as exc:
            print(f"qcommit: error: cannot write {cfg['out']}: {exc}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    for a in rep.assertions:
        if not a["pass"]:
            print(f"qcommit: assertion failed: {a['name']} (value {a['value']}, bound {a['bound']})",
                  file=sys.stderr)
    return 0 if rep.passed else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
