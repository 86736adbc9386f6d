"""Batch front end.

Scenario files are JSON documents; complex matrices are written as lists
of rows whose entries are two-element [re, im] pairs.  The GKS matrix is
expressed in the generalized Gell-Mann basis order used by
gell_mann_basis: symmetric pair operators first (lexicographic j<k),
then antisymmetric pairs, then the diagonal ladder.  For a qubit this is
(sigma_x, sigma_y, sigma_z)/sqrt(2).

Exit codes: 0 success / all-monotone, 1 computational verdict failure,
2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .channel import (VERDICT_MONOTONE, channel_from_generator, check_trace_preserving,
                      check_unital_kraus, choi_matrix, kraus_from_choi,
                      verify_monotone)
from .errors import MajoflowError, ScenarioError
from .lindblad import HamiltonianSchedule, check_unital, evolve, make_generator
from .majorization import majorizes
from .operator_core import (DEFAULT_TOL, DensityDiagnostic, Tolerances,
                            gell_mann_basis, validate_density)
from .single_spin import (random_schedule, reachable_interval,
                          simulate_controlled, spin_gks)

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_USAGE = 2


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def parse_matrix(obj, where: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise ScenarioError(f"{where}: expected a non-empty list of rows")
    rows = []
    width = None
    for i, row in enumerate(obj):
        if not isinstance(row, list) or (width is not None and len(row) != width):
            raise ScenarioError(f"{where}, row {i}: ragged or non-list row")
        width = len(row)
        entries = []
        for j, e in enumerate(row):
            if (not isinstance(e, list) or len(e) != 2
                    or not all(isinstance(v, (int, float)) for v in e)):
                raise ScenarioError(
                    f"{where}, row {i}, col {j}: entries must be [re, im] pairs")
            entries.append(complex(e[0], e[1]))
        rows.append(entries)
    return np.array(rows, dtype=complex)


def matrix_literal(M: np.ndarray):
    return [[[float(np.real(e)), float(np.imag(e))] for e in row] for row in np.asarray(M)]


class Scenario:
    def __init__(self, doc: dict, path: str):
        if not isinstance(doc, dict):
            raise ScenarioError(f"{path}: top level must be an object")
        self.doc = doc
        self.path = path
        try:
            self.dim = int(doc["dimension"])
        except (KeyError, TypeError, ValueError):
            raise ScenarioError(f"{path}: missing or invalid 'dimension'")
        if self.dim < 2 or self.dim > 32:
            raise ScenarioError(f"{path}: dimension must be in [2, 32]")
        self.seed = doc.get("seed")
        self.tol = DEFAULT_TOL.scaled(_tol_multiplier())
        self.options = doc.get("options", {})

    def basis(self):
        sel = self.doc.get("basis", "gell-mann")
        if sel == "gell-mann":
            return gell_mann_basis(self.dim)
        if isinstance(sel, list):
            from .operator_core import OperatorBasis
            ops = tuple(parse_matrix(m, f"basis[{i}]") for i, m in enumerate(sel))
            return OperatorBasis(dim=self.dim, operators=ops)
        raise ScenarioError(f"{self.path}: basis must be 'gell-mann' or a matrix list")

    def gks(self) -> np.ndarray:
        if "gks" not in self.doc:
            raise ScenarioError(f"{self.path}: missing 'gks'")
        A = parse_matrix(self.doc["gks"], "gks")
        want = self.dim * self.dim - 1
        if A.shape != (want, want):
            raise ScenarioError(
                f"{self.path}: gks must be {want}x{want} for dimension {self.dim}")
        return A

    def hamiltonian(self) -> HamiltonianSchedule:
        ham = self.doc.get("hamiltonian")
        if ham is None:
            return HamiltonianSchedule.constant(np.zeros((self.dim, self.dim)))
        if isinstance(ham, dict) and "segments" in ham:
            segs = []
            for i, seg in enumerate(ham["segments"]):
                try:
                    dur = float(seg["duration"])
                    H = parse_matrix(seg["matrix"], f"hamiltonian.segments[{i}].matrix")
                except (KeyError, TypeError, ValueError):
                    raise ScenarioError(
                        f"{self.path}: hamiltonian.segments[{i}] needs duration and matrix")
                segs.append((dur, H))
            return HamiltonianSchedule.piecewise(segs)
        if isinstance(ham, dict) and "constant" in ham:
            return HamiltonianSchedule.constant(
                parse_matrix(ham["constant"], "hamiltonian.constant"))
        return HamiltonianSchedule.constant(parse_matrix(ham, "hamiltonian"))

    def initial_state(self) -> np.ndarray:
        if "initial_state" not in self.doc:
            raise ScenarioError(f"{self.path}: missing 'initial_state'")
        M = parse_matrix(self.doc["initial_state"], "initial_state")
        if M.shape != (self.dim, self.dim):
            raise ScenarioError(f"{self.path}: initial_state has shape {M.shape}")
        return M

    def time_grid(self) -> np.ndarray:
        tg = self.doc.get("time_grid")
        if tg is None:
            raise ScenarioError(f"{self.path}: missing 'time_grid'")
        if isinstance(tg, dict) and "times" in tg:
            times = np.asarray(tg["times"], dtype=float)
        elif isinstance(tg, dict) and "t_end" in tg:
            try:
                t_end = float(tg["t_end"])
                samples = int(tg.get("samples", 50))
            except (TypeError, ValueError):
                raise ScenarioError(f"{self.path}: invalid time_grid")
            times = np.linspace(0.0, t_end, samples)
        else:
            raise ScenarioError(
                f"{self.path}: time_grid needs 'times' or 't_end'/'samples'")
        if times.ndim != 1 or len(times) < 2 or np.any(np.diff(times) <= 0) or times[0] != 0:
            raise ScenarioError(f"{self.path}: time grid must start at 0 and increase")
        return times

    def generator(self):
        return make_generator(self.dim, self.gks(), self.hamiltonian(),
                              basis=self.basis(), tol=self.tol)


def _tol_multiplier() -> float:
    raw = os.environ.get("MAJOFLOW_TOL", "1")
    try:
        v = float(raw)
    except ValueError:
        raise ScenarioError(f"MAJOFLOW_TOL must be a float, got {raw!r}")
    if v <= 0:
        raise ScenarioError("MAJOFLOW_TOL must be positive")
    return v


def load_scenario(path: str) -> Scenario:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as e:
        raise ScenarioError(f"cannot read {path}: {e}")
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}:{e.lineno}:{e.colno}: {e.msg}")
    return Scenario(doc, path)


def _atomic_write(path: str, text: str):
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _emit(path, text: str):
    if path:
        _atomic_write(path, text)
    else:
        sys.stdout.write(text)


def _report_header(scn: Scenario, extra=None) -> dict:
    hdr = {"library_version": __version__,
           "scenario": os.path.basename(scn.path),
           "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
           "tolerance_multiplier": _tol_multiplier()}
    if scn.seed is not None:
        hdr["seed"] = scn.seed
    if extra:
        hdr.update(extra)
    return hdr


def cmd_validate(args) -> int:
    scn = load_scenario(args.scenario)
    lines = []
    ok = True

    rho = validate_density(scn.initial_state(), scn.tol)
    if isinstance(rho, DensityDiagnostic):
        lines.append(f"initial_state: FAIL ({rho})")
        ok = False
    else:
        lines.append("initial_state: ok")

    basis = scn.basis()
    worst = 0.0
    for a, Fa in enumerate(basis.operators):
        worst = max(worst, abs(np.trace(Fa)))
        for b, Fb in enumerate(basis.operators):
            g = np.trace(Fa @ Fb.conj().T)
            worst = max(worst, abs(g - (1.0 if a == b else 0.0)))
    if worst > 1e-9:
        lines.append(f"basis: FAIL (orthonormality defect {worst:.3e})")
        ok = False
    else:
        lines.append("basis: ok")

    try:
        gen = scn.generator()
        lines.append("gks: ok" if gen.gks.psd_defect <= scn.tol.psd
                     else f"gks: marginal (psd defect {gen.gks.psd_defect:.3e})")
        rep = check_unital(gen)
        lines.append(f"unital: {'yes' if rep.unital else 'no'}, "
                     f"residual {rep.residual:.1e}")
        if not rep.unital:
            ok = False
    except MajoflowError as e:
        lines.append(f"gks: FAIL ({e})")
        ok = False

    print("\n".join(lines))
    return EXIT_OK if ok else EXIT_VERDICT


def _trajectory_csv(traj, scn: Scenario) -> str:
    N = traj.dim
    out = []
    for k, v in _report_header(scn, traj.metadata).items():
        out.append(f"# {k}={v}")
    cols = ["t"]
    for i in range(N):
        for j in range(N):
            cols += [f"re_{i}{j}", f"im_{i}{j}"]
    out.append(",".join(cols))
    for t, rho in zip(traj.times, traj.states):
        row = [_fmt(t)]
        for i in range(N):
            for j in range(N):
                row += [_fmt(np.real(rho[i, j])), _fmt(np.imag(rho[i, j]))]
        out.append(",".join(row))
    return "\n".join(out) + "\n"


def parse_trajectory_csv(text: str):
    """Round-trip reader for cmd_simulate CSV output."""
    times, states = [], []
    for line in text.splitlines():
        if not line or line.startswith("#") or line.startswith("t,"):
            continue
        vals = [float(v) for v in line.split(",")]
        N = int(round(np.sqrt((len(vals) - 1) / 2)))
        times.append(vals[0])
        flat = np.array(vals[1:]).reshape(N * N, 2)
        states.append((flat[:, 0] + 1j * flat[:, 1]).reshape(N, N))
    return np.array(times), states


def cmd_simulate(args) -> int:
    scn = load_scenario(args.scenario)
    gen = scn.generator()
    rho = validate_density(scn.initial_state(), scn.tol)
    if isinstance(rho, DensityDiagnostic):
        print(f"initial state invalid: {rho}", file=sys.stderr)
        return EXIT_VERDICT
    traj = evolve(gen, rho, scn.time_grid(), method=args.method)
    if args.format == "csv":
        _emit(args.out, _trajectory_csv(traj, scn))
    else:
        doc = {"metadata": _report_header(scn, traj.metadata),
               "times": [float(t) for t in traj.times],
               "states": [matrix_literal(s) for s in traj.states]}
        _emit(args.out, json.dumps(doc, indent=1) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    scn = load_scenario(args.scenario)
    gen = scn.generator()
    rho = validate_density(scn.initial_state(), scn.tol)
    if isinstance(rho, DensityDiagnostic):
        print(f"initial state invalid: {rho}", file=sys.stderr)
        return EXIT_VERDICT
    certs = verify_monotone(gen, rho, scn.time_grid(), pairs=args.pairs)
    counts = {"monotone": 0, "violated": 0, "inconclusive": 0}
    records = []
    for c in certs:
        counts[c.verdict] += 1
        records.append({
            "t1": c.t1, "t2": c.t2,
            "spectrum_before": [float(v) for v in c.spectrum_before],
            "spectrum_after": [float(v) for v in c.spectrum_after],
            "doubly_stochastic": [[float(v) for v in row] for row in c.D],
            "slack": [float(v) for v in c.slack],
            "entropy_delta": c.entropy_delta,
            "purity_delta": c.purity_delta,
            "verdict": c.verdict,
        })
    doc = {"metadata": _report_header(scn, {"pairs": args.pairs}),
           "summary": counts, "certificates": records}
    _emit(args.out, json.dumps(doc, indent=1) + "\n")
    print(f"certificates: {counts['monotone']} monotone, "
          f"{counts['violated']} violated, {counts['inconclusive']} inconclusive")
    all_monotone = counts["violated"] == 0 and counts["inconclusive"] == 0
    return EXIT_OK if all_monotone else EXIT_VERDICT


def cmd_kraus(args) -> int:
    scn = load_scenario(args.scenario)
    gen = scn.generator()
    if not args.t2 > args.t1:
        print("need --t2 > --t1", file=sys.stderr)
        return EXIT_USAGE
    Psi = channel_from_generator(gen, args.t1, args.t2)
    C = choi_matrix(Psi)
    ks = kraus_from_choi(C)
    tp = check_trace_preserving(ks)
    un = check_unital_kraus(ks)
    doc = {"metadata": _report_header(scn, {"t1": args.t1, "t2": args.t2}),
           "kraus_operators": [matrix_literal(K) for K in ks.operators],
           "trace_preserving_residual": tp.residual,
           "unital_residual": un.residual,
           "choi_spectrum": [float(v) for v in
                             np.sort(np.linalg.eigvalsh(C))[::-1]],
           "discarded_mass": ks.discarded_mass}
    _emit(args.out, json.dumps(doc, indent=1) + "\n")
    return EXIT_OK


def cmd_reachable_spin(args) -> int:
    scn = load_scenario(args.scenario)
    if scn.dim != 2:
        print("reachable-spin requires a qubit scenario (dimension 2)",
              file=sys.stderr)
        return EXIT_USAGE
    seed = args.seed if args.seed is not None else scn.seed
    if seed is None:
        print("a seed is required (--seed or scenario 'seed')", file=sys.stderr)
        return EXIT_USAGE
    A = spin_gks(scn.gks())
    lam0 = args.lambda0 if args.lambda0 is not None \
        else float(scn.options.get("lambda0", 0.5))
    T = args.horizon
    lo, hi = reachable_interval(A, T, lam0)
    rng = np.random.default_rng(int(seed))
    rows = [f"# library_version={__version__}",
            f"# seed={seed}", f"# horizon={_fmt(T)}", f"# lambda0={_fmt(lam0)}",
            f"# interval_lo={_fmt(lo)}", f"# interval_hi={_fmt(hi)}",
            "sample,final_lambda"]
    violations = 0
    for i in range(args.samples):
        sched = random_schedule(T, num_segments=int(rng.integers(1, 9)), rng=rng)
        run = simulate_controlled(A, sched, lam0, T, full_check=False)
        if not (lo - 1e-8 <= run.final_lambda <= hi + 1e-8):
            violations += 1
        rows.append(f"{i},{_fmt(run.final_lambda)}")
    _emit(args.out, "\n".join(rows) + "\n")
    print(f"interval [{_fmt(lo)}, {_fmt(hi)}], "
          f"{args.samples} samples, {violations} outside")
    return EXIT_OK if violations == 0 else EXIT_VERDICT


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="majoflow",
                                description="Lindblad dynamics and majorization "
                                            "monotonicity certificates")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--scenario", required=True)
        sp.add_argument("--out", default=None)

    sp = sub.add_parser("validate", help="validate scenario objects")
    sp.add_argument("--scenario", required=True)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("simulate", help="integrate the master equation")
    common(sp)
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.add_argument("--method", choices=["exact-expm", "rk4"], default="exact-expm")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify", help="emit majorization certificates")
    common(sp)
    sp.add_argument("--pairs", choices=["adjacent", "all"], default="adjacent")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("kraus", help="dump the interval channel's Kraus operators")
    common(sp)
    sp.add_argument("--t1", type=float, required=True)
    sp.add_argument("--t2", type=float, required=True)
    sp.set_defaults(func=cmd_kraus)

    sp = sub.add_parser("reachable-spin",
                        help="single-spin reachable interval plus Monte-Carlo envelope")
    common(sp)
    sp.add_argument("--horizon", type=float, required=True)
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--lambda0", type=float, default=None)
    sp.set_defaults(func=cmd_reachable_spin)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except MajoflowError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VERDICT


if __name__ == "__main__":
    sys.exit(main())
