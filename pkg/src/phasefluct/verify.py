"""Verification suite: every acceptance check, runnable from the CLI.

Each ``check_*`` function returns a list of :class:`Check` rows, one per
process (or one overall) with the worst value measured over its grid.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .analysis import convergence_slope
from .evolution import EvolutionSettings, heisenberg_taylor
from .fock import (
    coherent_pump_state,
    commutator,
    expectation,
    max_entry_difference,
    max_shift,
    number_op,
)
from .phase import bp_operators, moments, sg_operators
from .pipeline import exact_point, evolved_state
from .processes import (
    PROCESSES,
    SMALLNESS_COEFF,
    VALIDITY_THRESHOLD,
    ProcessSpec,
    closed_form,
    conserved_quantities,
    heisenberg_reference_operator,
    interaction_hamiltonian,
    process_space,
    pump_lowering,
)
from .sweep import SweepConfig, TimeGrid, records_to_csv, run_sweep

BASE_ALPHA_SQ = (0.5, 1.0, 2.0, 4.0)

AGREEMENT_ALPHA_SQ = (1.0, 2.0)
AGREEMENT_THETA = (0.0, math.pi / 4)
AGREEMENT_X = 1e-4  # g^2 t^2 |alpha|^2
AGREEMENT_TOL = 1e-3

SLOPE_GT = (0.01, 0.02, 0.03, 0.05)
SLOPE_MIN = 3.0

ANTIBUNCH_GT = (0.002, 0.005, 0.01)
ANTIBUNCH_THETA = (0.0, math.pi / 4)
ANTIBUNCH_K = {"fwm": 6.0, "swm": 12.0, "shg": 2.0}
ANTIBUNCH_RATIO = (0.9, 1.1)

CLAIM_THETA = (0.0, math.pi / 4, math.pi / 3, math.pi / 2)
CLAIM_STEPS = 20

IDENTITY_ALPHA_SQ = (1.0, 2.0)
IDENTITY_THETA = (0.0, math.pi / 3)
IDENTITY_GT = (0.0, 0.005, 0.01, 0.02)

TAYLOR_G = 0.1
TAYLOR_T = 0.1
TAYLOR_TOL = 1e-9

CONSERVATION_T = (0.01, 0.02, 0.05)
CONSERVATION_TOL = 1e-8
DRIFT_TOL = 1e-9

MONOTONE_GT_SQ = 1e-4


@dataclass(frozen=True)
class Check:
    criterion: int
    name: str
    process: str
    passed: bool
    measured: float
    threshold: str
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        proc = f" [{self.process}]" if self.process else ""
        text = f"{status}  C{self.criterion:<2} {self.name}{proc}: measured {self.measured:.6g} (need {self.threshold})"
        return text + (f" -- {self.detail}" if self.detail else "")


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def format(self) -> str:
        lines = [c.line() for c in self.checks]
        n_fail = len(self.failures())
        lines.append(
            f"{len(self.checks) - n_fail}/{len(self.checks)} checks passed"
            + ("" if self.passed else f"; {n_fail} failed")
        )
        return "\n".join(lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["criterion", "name", "process", "status", "measured",
                         "threshold", "detail"])
        for c in self.checks:
            writer.writerow([c.criterion, c.name, c.process,
                             "pass" if c.passed else "fail",
                             format(c.measured, ".17g"), c.threshold, c.detail])
        return buf.getvalue()


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b) if abs(b) >= 1e-12 else abs(a - b)


# --- criteria -------------------------------------------------------------


def check_coherent_baseline(processes: Sequence[str]) -> list:
    out = []
    for kind in processes:
        worst_bp, min_sg = 0.0, math.inf
        for a2 in BASE_ALPHA_SQ:
            spec = ProcessSpec.create(kind, a2, 0.0, 1.0, 0.0)
            worst_bp = max(worst_bp, abs(exact_point(spec, "bp").cn.U - 0.5))
            min_sg = min(min_sg, exact_point(spec, "sg").cn.U)
        out.append(Check(1, "BP U at t=0 equals 1/2", kind, worst_bp <= 1e-9,
                         worst_bp, "|U-0.5| <= 1e-9"))
        out.append(Check(1, "SG U at t=0 >= 1/4", kind, min_sg >= 0.25,
                         min_sg, ">= 0.25"))
    return out


def agreement_errors(kind: str) -> dict:
    """Worst relative error per quantity over the agreement grid."""
    worst = {"U": 0.0, "N_bar": 0.0, "d": 0.0}
    for a2 in AGREEMENT_ALPHA_SQ:
        for theta in AGREEMENT_THETA:
            t = math.sqrt(AGREEMENT_X / a2)
            spec = ProcessSpec.create(kind, a2, theta, 1.0, t)
            point = exact_point(spec, "bp")
            formula = closed_form(spec)
            worst["U"] = max(worst["U"], _rel(point.cn.U, formula.U))
            worst["N_bar"] = max(worst["N_bar"], _rel(point.moments.mean_N, formula.N_bar))
            worst["d"] = max(worst["d"], _rel(point.cn.d, formula.d))
    return worst


def check_closed_form_agreement(processes: Sequence[str]) -> list:
    out = []
    for kind in processes:
        for name, err in agreement_errors(kind).items():
            out.append(Check(2, f"exact vs formula {name}", kind,
                             err <= AGREEMENT_TOL, err, f"rel <= {AGREEMENT_TOL:g}"))
    return out


def u_error_series(kind: str, alpha_sq: float = 1.0, theta: float = 0.0) -> list:
    points = []
    for gt in SLOPE_GT:
        spec = ProcessSpec.create(kind, alpha_sq, theta, 1.0, gt)
        err = abs(exact_point(spec, "bp").cn.U - closed_form(spec, warn=False).U)
        points.append((gt, err))
    return points


def check_convergence_order(processes: Sequence[str]) -> list:
    out = []
    for kind in processes:
        est = convergence_slope(u_error_series(kind))
        out.append(Check(3, "log-log slope of |U_exact - U_formula|", kind,
                         est.slope >= SLOPE_MIN, est.slope, f">= {SLOPE_MIN:g}"))
    return out


def antibunching_ratios(kind: str):
    ratios, max_d = [], -math.inf
    for a2 in BASE_ALPHA_SQ:
        for theta in ANTIBUNCH_THETA:
            for gt in ANTIBUNCH_GT:
                spec = ProcessSpec.create(kind, a2, theta, 1.0, gt)
                d = exact_point(spec, "bp").cn.d
                max_d = max(max_d, d)
                ratios.append(d / (-ANTIBUNCH_K[kind] * gt**2 * a2**2))
    return ratios, max_d


def check_antibunching(processes: Sequence[str]) -> list:
    out = []
    lo, hi = ANTIBUNCH_RATIO
    for kind in processes:
        ratios, max_d = antibunching_ratios(kind)
        out.append(Check(4, "exact d < 0", kind, max_d < 0, max_d, "< 0"))
        worst = max(ratios, key=lambda r: max(lo - r, r - hi))
        ok = all(lo <= r <= hi for r in ratios)
        out.append(Check(4, f"d_exact / (-{ANTIBUNCH_K[kind]:g} g^2t^2|a|^4)", kind, ok,
                         worst, f"in [{lo:g}, {hi:g}]",
                         f"range {min(ratios):.4f}..{max(ratios):.4f}"))
    return out


def claim_grid(kind: str):
    for a2 in BASE_ALPHA_SQ:
        gt_max = math.sqrt(VALIDITY_THRESHOLD / (SMALLNESS_COEFF[kind] * a2))
        for theta in CLAIM_THETA:
            for gt in np.linspace(0.0, gt_max, CLAIM_STEPS + 1):
                yield ProcessSpec.create(kind, a2, theta, 1.0, float(gt))


def check_central_claim(processes: Sequence[str]) -> list:
    out = []
    for kind in processes:
        bad = 0
        total = 0
        for spec in claim_grid(kind):
            f = closed_form(spec, warn=False)
            su, sd = np.sign(f.U - 0.5), np.sign(f.d)
            total += 1
            if spec.t == 0:
                ok = su == 0 and sd == 0
            else:
                ok = su == sd == -1
            bad += not ok
        out.append(Check(5, "sign(U_formula - 1/2) == sign(d_formula) <= 0", kind,
                         bad == 0, bad, "0 violations", f"{total} grid points"))
    return out


def check_operator_identities(processes: Sequence[str]) -> list:
    out = []
    for kind in processes:
        sg_sum = bp_sum = unc = 0.0
        comm = 0.0
        for a2 in IDENTITY_ALPHA_SQ:
            space = process_space(kind, a2)
            sg = sg_operators(space)
            lhs = commutator(sg.C, sg.S)
            comm = max(comm, max_entry_difference(
                lhs, sg.P0 * 0.5j, space.interior_indices(1)))
            for theta in IDENTITY_THETA:
                for gt in IDENTITY_GT:
                    spec = ProcessSpec.create(kind, a2, theta, 1.0, gt)
                    state = evolved_state(spec)
                    m = moments(state, sg)
                    sg_sum = max(sg_sum, abs(m.mean_C2 + m.mean_S2 + m.mean_P0 / 2 - 1))
                    sn = math.sqrt(m.var_N)
                    unc = max(unc,
                              0.5 * abs(m.mean_C) - sn * math.sqrt(m.var_S),
                              0.5 * abs(m.mean_S) - sn * math.sqrt(m.var_C))
                    n_bar = expectation(state, number_op(space, space.pump_mode)).real
                    mb = moments(state, bp_operators(space, n_bar=n_bar))
                    bp_sum = max(bp_sum, abs(mb.mean_C2 + mb.mean_S2 - 1))
        out += [
            Check(6, "SG <C^2>+<S^2>+<P0>/2 = 1", kind, sg_sum <= 1e-8, sg_sum, "<= 1e-8"),
            Check(6, "SG [C,S] = (i/2) P0 on interior", kind, comm <= 1e-10, comm, "<= 1e-10"),
            Check(6, "BP <C^2>+<S^2> = 1", kind, bp_sum <= 1e-8, bp_sum, "<= 1e-8"),
            Check(6, "SG number-phase uncertainty", kind, unc <= 1e-10, unc,
                  "violation <= 1e-10"),
        ]
    return out


def taylor_difference(kind: str, g: float = TAYLOR_G, t: float = TAYLOR_T) -> float:
    """Interior max-entry gap between the automated and closed-form expansions."""
    spec = ProcessSpec.create(kind, 1.0, 0.0, g, t)
    space = process_space(spec)
    H = interaction_hamiltonian(spec, space)
    A = pump_lowering(space)
    auto = heisenberg_taylor(H, A, 2).evaluate(t)
    ref = heisenberg_reference_operator(spec, space)
    margin = 2 * max_shift(H) + max_shift(A)
    return max_entry_difference(auto, ref, space.interior_indices(margin))


def check_taylor_fidelity(processes: Sequence[str]) -> list:
    return [
        Check(7, "order-2 nested commutators vs closed-form A(t)", kind,
              (diff := taylor_difference(kind)) <= TAYLOR_TOL, diff, f"<= {TAYLOR_TOL:g}")
        for kind in processes
    ]


def conservation_drifts(kind: str, alpha_sq: float = 1.0, g: float = 1.0) -> dict:
    spec0 = ProcessSpec.create(kind, alpha_sq, 0.0, g, 0.0)
    space = process_space(spec0)
    H = interaction_hamiltonian(spec0, space)
    psi0 = coherent_pump_state(space, spec0.pump)
    invariants = conserved_quantities(kind, space)
    before = {k: expectation(psi0, op).real for k, op in invariants.items()}
    e0 = expectation(psi0, H).real
    drift = {"invariant": 0.0, "norm": 0.0, "energy": 0.0}
    for t in CONSERVATION_T:
        spec = ProcessSpec.create(kind, alpha_sq, 0.0, g, t / g)
        state = evolved_state(spec, settings=EvolutionSettings())
        for k, op in invariants.items():
            drift["invariant"] = max(drift["invariant"],
                                     abs(expectation(state, op).real - before[k]))
        drift["norm"] = max(drift["norm"], abs(state.norm - 1.0))
        drift["energy"] = max(drift["energy"], abs(expectation(state, H).real - e0))
    return drift


def check_conservation(processes: Sequence[str]) -> list:
    out = []
    for kind in processes:
        d = conservation_drifts(kind)
        out += [
            Check(8, "conserved number combinations", kind,
                  d["invariant"] <= CONSERVATION_TOL, d["invariant"],
                  f"<= {CONSERVATION_TOL:g}"),
            Check(8, "norm drift", kind, d["norm"] <= DRIFT_TOL, d["norm"], f"<= {DRIFT_TOL:g}"),
            Check(8, "energy drift", kind, d["energy"] <= DRIFT_TOL, d["energy"],
                  f"<= {DRIFT_TOL:g}"),
        ]
    return out


def formula_u_curve(kind: str) -> list:
    t = math.sqrt(MONOTONE_GT_SQ)
    return [closed_form(ProcessSpec.create(kind, a2, 0.0, 1.0, t)).U for a2 in BASE_ALPHA_SQ]


def check_monotonicity(processes: Sequence[str]) -> list:
    out = []
    drops = {}
    for kind in processes:
        curve = formula_u_curve(kind)
        steps = np.diff(curve)
        drops[kind] = curve[0] - curve[-1]
        out.append(Check(9, "U_formula strictly decreasing in |alpha|^2", kind,
                         bool(np.all(steps < 0)), float(np.max(steps)), "all steps < 0"))
    if set(PROCESSES) <= set(processes):
        steepest = max(drops, key=drops.get)
        out.append(Check(9, "six-wave mixing has the steepest U decrease", "",
                         steepest == "swm", drops["swm"], "largest drop",
                         ", ".join(f"{k}={v:.3g}" for k, v in drops.items())))
    return out


def check_determinism(processes: Sequence[str]) -> list:
    kind = processes[0]
    config = SweepConfig(process=kind, alpha_sq=(1.0, 2.0), theta=(0.0, math.pi / 4),
                         g=1.0, t=TimeGrid(0.001, 0.01, 3, "log"))
    first = records_to_csv(run_sweep(config, threads=2)[0])
    second = records_to_csv(run_sweep(config, threads=1)[0])
    same = first == second
    return [Check(10, "repeated sweep is byte-identical", kind, same, float(not same),
                  "identical CSV")]


CRITERIA = (
    check_coherent_baseline,
    check_closed_form_agreement,
    check_convergence_order,
    check_antibunching,
    check_central_claim,
    check_operator_identities,
    check_taylor_fidelity,
    check_conservation,
    check_monotonicity,
    check_determinism,
)


def verify(processes: Iterable[str] = PROCESSES) -> VerificationReport:
    processes = tuple(processes)
    unknown = set(processes) - set(PROCESSES)
    if unknown or not processes:
        raise ValueError(f"unknown process selection {sorted(unknown)}")
    checks = []
    for criterion in CRITERIA:
        checks.extend(criterion(processes))
    return VerificationReport(tuple(checks))


def taylor_check(processes: Iterable[str] = PROCESSES) -> VerificationReport:
    return VerificationReport(tuple(check_taylor_fidelity(tuple(processes))))
