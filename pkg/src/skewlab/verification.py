"""End-to-end verification checks: one function per acceptance criterion.

Each check returns a CheckResult; `run` prints one PASS/FAIL line per
criterion and returns a process exit status.  The same checks back the
test suite, so `skewlab verify --all` and pytest agree by construction.
"""

from __future__ import annotations

import math
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import cli, dynamics, maxmargin, skews, taskgen
from .core import Dataset, LabeledPoint
from .taskgen import GenSpec

SLOP = 1e-9
LOG_GRID = tuple(np.logspace(-2, 6, 33).tolist())


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed: float = 0.0

    @property
    def line(self) -> str:
        word = "PASS" if self.passed else "FAIL"
        return (
            f"criterion {self.number:2d}: {word} {self.name} "
            f"[{self.elapsed:.1f}s] {self.detail}"
        )


def _rel_close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


# -- 1 ----------------------------------------------------------------------


def _random_problem(seed: int) -> maxmargin.MarginProblem:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    d_inv = int(rng.integers(1, 4))
    mask = "full" if (rng.random() < 0.5 and d_inv <= 3) else "inv_only"
    bias = bool(rng.random() < 0.5)
    points = []
    for _ in range(n):
        y = 1 if rng.random() < 0.5 else -1
        inv = tuple(rng.normal(0, 1, d_inv).tolist())
        sp = (float(rng.normal(0, 1)),)
        points.append(LabeledPoint(inv, sp, y))
    dataset = Dataset(tuple(points), 1.0, False, {})
    targets = tuple(
        1.0 if rng.random() < 0.5 else float(rng.uniform(0.0, 2.0))
        for _ in range(n)
    )
    return maxmargin.MarginProblem(dataset, targets, mask, bias)


def check_qp_oracle_equivalence() -> CheckResult:
    """1: iterative solver matches the exhaustive active-set oracle."""
    mismatches = []
    infeasible = 0
    for k in range(200):
        problem = _random_problem(1000 + k)
        try:
            expected = maxmargin.oracle_active_set(problem)
        except maxmargin.NotSeparableError:
            expected = None
        try:
            got = maxmargin.solve_least_norm(problem, tol=1e-10)
        except maxmargin.NotSeparableError:
            got = None
        if expected is None or got is None:
            if (expected is None) != (got is None):
                mismatches.append(f"instance {k}: feasibility disagreement")
            else:
                infeasible += 1
            continue
        if not got.converged:
            mismatches.append(f"instance {k}: solver did not converge")
        elif not _rel_close(got.objective, expected.objective, 1e-6):
            mismatches.append(
                f"instance {k}: objective {got.objective:.9g} vs oracle "
                f"{expected.objective:.9g}"
            )
    detail = f"200 instances ({infeasible} infeasible), backend {maxmargin.KERNEL_BACKEND}"
    if mismatches:
        detail += "; " + "; ".join(mismatches[:3])
    return CheckResult(1, "qp-oracle-equivalence", not mismatches, detail)


# -- 2 ----------------------------------------------------------------------


def check_worked_geometric_instance() -> CheckResult:
    """2: the hand-computed geometric two-margin instance."""
    d = taskgen.gen_geometric_2d(0.1, 2.0, 2, 2, B=1.0)
    sol = maxmargin.full_max_margin(d)
    report = skews.compute_skew_report(d)
    issues = []
    w_inv, w_sp, b = sol.model.w_inv[0], sol.model.w_sp_scalar, sol.model.bias
    if abs(w_inv - 20.0 / 21.0) > 1e-4 or abs(w_sp - 19.0 / 21.0) > 1e-4:
        issues.append(f"w = ({w_inv:.6f}, {w_sp:.6f}) != (20/21, 19/21)")
    if abs(b) > 1e-4:
        issues.append(f"b = {b:.2e}")
    for name, got in (
        ("kappa1", report.kappa1), ("kappa2", report.kappa2),
        ("kappa1~", report.kappa1_tilde), ("kappa2~", report.kappa2_tilde),
        ("c1", report.c1), ("c2", report.c2),
    ):
        if abs(got - 0.05) > 1e-6:
            issues.append(f"{name} = {got:.8f} != 0.05")
    expected_lower = 1.0 - 2.0 * math.sqrt(0.05 + 0.05**2)
    if abs(report.lower_bound - expected_lower) > 1e-6:
        issues.append(f"lower {report.lower_bound:.6f} != {expected_lower:.6f}")
    if abs(report.upper_bound - 10.0) > 1e-4:
        issues.append(f"upper {report.upper_bound:.6f} != 10")
    if not report.sandwich_holds:
        issues.append("sandwich violated")
    detail = (
        f"B*w_sp = {report.measured_b_wsp:.4f} in "
        f"[{report.lower_bound:.4f}, {report.upper_bound:.4f}]"
    )
    if issues:
        detail += "; " + "; ".join(issues)
    return CheckResult(2, "worked-geometric-instance", not issues, detail)


# -- 3 ----------------------------------------------------------------------


def check_geometric_sandwich_sweep() -> CheckResult:
    """3: lower <= measured <= upper over a margin/size grid."""
    maj_margins = (0.05, 0.1, 0.2, 0.3, 0.4)
    min_margins = (1.0, 1.5, 2.0, 3.0, 5.0)
    sizes = ((2, 2), (4, 4), (8, 8))
    cells = 0
    failures = []
    for a in maj_margins:
        for m in min_margins:
            for n_maj, n_min in sizes:
                d = taskgen.gen_geometric_2d(a, m, n_maj, n_min, B=1.0)
                report = skews.compute_skew_report(d)
                if not (report.lower_precondition and report.upper_precondition):
                    failures.append(f"({a},{m},{n_maj}): precondition unmet")
                    continue
                cells += 1
                ok = (
                    report.measured_b_wsp >= report.lower_bound - SLOP
                    and abs(report.measured_b_wsp) <= report.upper_bound + SLOP
                )
                if not ok:
                    failures.append(
                        f"({a},{m},{n_maj}): {report.lower_bound:.4f} <= "
                        f"{report.measured_b_wsp:.4f} <= {report.upper_bound:.4f}"
                    )
    detail = f"{cells} grid cells with preconditions met"
    if failures:
        detail += "; " + "; ".join(failures[:3])
    return CheckResult(3, "geometric-sandwich-sweep", not failures, detail)


# -- 4 ----------------------------------------------------------------------


def check_balanced_mitigation() -> CheckResult:
    """4: balanced margins erase the spurious weight on the worked
    instance."""
    d = taskgen.gen_geometric_2d(0.1, 2.0, 2, 2, B=1.0)
    sol = maxmargin.balanced_max_margin(d, c=0.05)
    w_sp = sol.model.w_sp_scalar
    passed = abs(w_sp) <= 1e-6 and sol.converged
    return CheckResult(
        4, "balanced-maxmargin-mitigation", passed,
        f"w_sp = {w_sp:.2e} with balance c = 0.05",
    )


# -- 5 ----------------------------------------------------------------------


def check_closed_form_dynamics() -> CheckResult:
    """5: exponential flow matches the 2D closed form."""
    d = taskgen.gen_2dim(GenSpec(n=20, p=0.9, B=1.0, exact_counts=True))
    checkpoints = (0.01, 0.1, 1.0, 10.0, 100.0, 1e4)
    spec = dynamics.DynSpec(loss="exponential", mode="flow", t_checkpoints=checkpoints)
    traj = dynamics.simulate(d, spec)
    failures = []
    for r in traj.records:
        ref_inv, ref_sp = dynamics.closed_form_2dim_exp(0.9, r.t)
        if (
            abs(r.w_inv[0] - ref_inv) > 1e-3 * max(1e-6, abs(ref_inv))
            or abs(r.w_sp - ref_sp) > 1e-3 * max(1e-6, abs(ref_sp))
        ):
            failures.append(
                f"t={r.t:g}: ({r.w_inv[0]:.6f}, {r.w_sp:.6f}) vs "
                f"({ref_inv:.6f}, {ref_sp:.6f})"
            )
    at10 = next(r for r in traj.records if r.t == 10.0)
    if abs(at10.w_inv[0] - 2.02148) > 1e-4 or abs(at10.w_sp - 0.92291) > 1e-4:
        failures.append(f"t=10 state ({at10.w_inv[0]:.5f}, {at10.w_sp:.5f})")
    detail = f"t=10 -> ({at10.w_inv[0]:.5f}, {at10.w_sp:.5f})"
    if failures:
        detail += "; " + "; ".join(failures[:3])
    return CheckResult(5, "closed-form-dynamics", not failures, detail)


# -- 6 / 7 ------------------------------------------------------------------


def _invariant_dataset(p: float) -> Dataset:
    if p == 0.5:
        return taskgen.gen_2dim(GenSpec(n=4, p=0.5, B=1.0, pairing=True))
    return taskgen.gen_2dim(GenSpec(n=20, p=p, B=1.0, exact_counts=True))


def check_exponential_invariants() -> CheckResult:
    """6: proof-level invariants of the exponential-loss 2D flow."""
    failures = []
    for p in (0.5, 0.6, 0.75, 0.9):
        d = _invariant_dataset(p)
        spec = dynamics.DynSpec(loss="exponential", mode="flow", t_checkpoints=LOG_GRID)
        traj = dynamics.simulate(d, spec)
        sp = [r.w_sp for r in traj.records]
        betas = [r.beta_2d for r in traj.records]
        ceiling = dynamics.fixed_point_exp(p, 1.0)
        if p == 0.5:
            if any(v != 0.0 for v in sp):
                failures.append(f"p=0.5: w_sp not identically zero (max {max(sp):.2e})")
            continue
        if any(b < a - SLOP for a, b in zip(sp, sp[1:])):
            failures.append(f"p={p}: w_sp not nondecreasing")
        if any(v > ceiling + SLOP for v in sp):
            failures.append(f"p={p}: w_sp exceeds fixed point {ceiling:.5f}")
        if any(b > a + SLOP for a, b in zip(betas, betas[1:])):
            failures.append(f"p={p}: beta not nonincreasing")
    detail = f"p grid (0.5, 0.6, 0.75, 0.9), t up to 1e6 ({len(LOG_GRID)} checkpoints)"
    if failures:
        detail += "; " + "; ".join(failures[:3])
    return CheckResult(6, "exponential-2d-invariants", not failures, detail)


def check_logistic_invariants() -> CheckResult:
    """7: proof-level invariants of the logistic-loss 2D flow.

    The third clause (the pointwise cap on w_sp) is checked exactly as
    stated; it is known to be violated by the true dynamics at moderate
    t, and the violation magnitude is reported.
    """
    failures = []
    for p in (0.5, 0.6, 0.75, 0.9):
        d = _invariant_dataset(p)
        spec = dynamics.DynSpec(loss="logistic", mode="flow", t_checkpoints=LOG_GRID)
        traj = dynamics.simulate(d, spec)
        for r in traj.records:
            if r.w_sp < -SLOP:
                failures.append(f"p={p}, t={r.t:g}: w_sp = {r.w_sp:.3e} < 0")
                break
        for r in traj.records:
            if r.w_inv[0] > math.log1p(r.t) + SLOP:
                failures.append(
                    f"p={p}, t={r.t:g}: w_inv = {r.w_inv[0]:.6f} > ln(1+t)"
                )
                break
        cap_violation = 0.0
        for r in traj.records:
            cap = dynamics.logistic_sp_envelope(p, r.t)
            cap_violation = max(cap_violation, r.w_sp - cap)
        if cap_violation > SLOP:
            failures.append(
                f"p={p}: w_sp exceeds the stated cap by {cap_violation:.4f}"
            )
    detail = "clauses 1-2 hold on the full grid"
    if failures:
        detail += "; " + "; ".join(failures[:4])
    return CheckResult(7, "logistic-2d-invariants", not failures, detail)


# -- 8 ----------------------------------------------------------------------


def check_fig5a_ordering() -> CheckResult:
    """8: discrete logistic GD reproduces the skew ordering of beta."""
    ps = (0.9, 0.75, 0.6, 0.5)
    checkpoints = (10.0, 100.0, 1000.0)
    datasets = {p: taskgen.gen_2dim(GenSpec(n=2048, p=p, B=1.0, exact_counts=True))
                for p in ps}
    failures = []
    for seed in range(5):
        betas: dict[float, list[float]] = {}
        for p in ps:
            spec = dynamics.DynSpec(
                loss="logistic", mode="discrete", lr=1e-3, batch_size=32,
                seed=seed, t_checkpoints=checkpoints,
            )
            traj = dynamics.simulate(datasets[p], spec)
            betas[p] = [r.beta for r in traj.records]
        for k, epoch in enumerate(checkpoints):
            ordered = (
                betas[0.9][k] > betas[0.75][k] > betas[0.6][k] > betas[0.5][k]
            )
            if not ordered:
                failures.append(
                    f"seed {seed}, epoch {epoch:g}: "
                    + " / ".join(f"{betas[p][k]:.4f}" for p in ps)
                )
            if abs(betas[0.5][k]) >= 0.01:
                failures.append(
                    f"seed {seed}, epoch {epoch:g}: beta(0.5) = {betas[0.5][k]:.4f}"
                )
    detail = "5 seeds, epochs (10, 100, 1000), minibatch 32"
    if failures:
        detail += "; " + "; ".join(failures[:3])
    return CheckResult(8, "fig5a-beta-ordering", not failures, detail)


# -- 9 ----------------------------------------------------------------------


def check_duplication_skew() -> CheckResult:
    """9: majority oversampling inflates finite-time beta but leaves the
    max-margin solution untouched."""
    failures = []
    for seed in range(5):
        control = taskgen.gen_2dim(GenSpec(n=200, p=0.5, B=1.0, pairing=True, seed=seed))
        dup = taskgen.duplicate_majority(control, 10.0, seed=seed)
        spec = dynamics.DynSpec(
            loss="logistic", mode="discrete", lr=1e-3,
            t_checkpoints=(10.0, 100.0, 1000.0), seed=seed,
        )
        t_con = dynamics.simulate(control, spec)
        t_dup = dynamics.simulate(dup, spec)
        for rc, rd in zip(t_con.records, t_dup.records):
            if not rd.beta > rc.beta:
                failures.append(
                    f"seed {seed}, epoch {rc.t:g}: dup beta {rd.beta:.4f} "
                    f"<= control {rc.beta:.4f}"
                )
        mm_con = maxmargin.full_max_margin(control)
        mm_dup = maxmargin.full_max_margin(dup)
        delta = max(
            abs(np.array(mm_con.model.w) - np.array(mm_dup.model.w)).max(),
            abs(mm_con.model.bias - mm_dup.model.bias),
        )
        if delta > 1e-6:
            failures.append(f"seed {seed}: max-margin solutions differ by {delta:.2e}")
    detail = "10:1 duplication vs paired control, 5 seeds"
    if failures:
        detail += "; " + "; ".join(failures[:3])
    return CheckResult(9, "duplication-statistical-skew", not failures, detail)


# -- 10 ---------------------------------------------------------------------


def check_norm_growth() -> CheckResult:
    """10: prefix least-norm curves grow monotonically; the harmonic
    construction gives ||v|| = n exactly."""
    failures = []
    # symmetric pairs at margins 1/i: after i pairs the norm is exactly i
    inv_points = []
    for i in range(1, 13):
        inv_points.append(((1.0 / i,), 1))
        inv_points.append(((-1.0 / i,), -1))
    sizes = [2 * i for i in range(1, 13)]
    rows = skews.norm_growth_curve(inv_points, sizes)
    for (n, v, _), i in zip(rows, range(1, 13)):
        if not _rel_close(v, float(i), 1e-6):
            failures.append(f"harmonic prefix {i}: ||v|| = {v:.8f} != {i}")
    # heavy-tailed random margins: monotone growth of both curves
    for seed in range(100):
        rng = np.random.default_rng(7000 + seed)
        margins = 1.0 + rng.pareto(1.5, size=40)
        labels = np.where(rng.random(40) < 0.5, 1, -1)
        pts = [((float(y * 1.0 / m),), int(y)) for m, y in zip(margins, labels)]
        curve = skews.norm_growth_curve(pts, [2, 5, 10, 20, 40])
        vs = [r[1] for r in curve]
        vts = [r[2] for r in curve]
        if any(b < a - SLOP for a, b in zip(vs, vs[1:])):
            failures.append(f"seed {seed}: ||v|| not nondecreasing")
        if any(b < a - SLOP for a, b in zip(vts, vts[1:])):
            failures.append(f"seed {seed}: ||v~|| not nondecreasing")
    detail = "harmonic exactness (12 prefixes) + 100 heavy-tail seeds"
    if failures:
        detail += "; " + "; ".join(failures[:3])
    return CheckResult(10, "norm-growth-monotonicity", not failures, detail)


# -- 11 ---------------------------------------------------------------------


def check_highdim_accumulation() -> CheckResult:
    """11: many weak spurious coordinates dominate the invariant one."""
    hits = 0
    ratios = []
    for seed in range(20):
        d = taskgen.gen_highdim_spurious(50, 100, 0.6, inv_margin=1.0, seed=seed)
        check = skews.verify_highdim_proposition(d, c=0.2, delta=0.1)
        ratios.append(check.ratio)
        if check.ratio >= 1.0:
            hits += 1
    passed = hits >= 18
    detail = (
        f"{hits}/20 seeds with ||w_sp||/w_inv >= 1.0 "
        f"(median {sorted(ratios)[10]:.3f}; rate precondition is borderline "
        "by design and reported, not asserted)"
    )
    return CheckResult(11, "highdim-accumulation", passed, detail)


# -- 12 ---------------------------------------------------------------------


def check_gradient_correctness() -> CheckResult:
    """12: analytic gradients match central differences."""
    failures = []
    h = 1e-6
    for k in range(50):
        rng = np.random.default_rng(3000 + k)
        n, d = int(rng.integers(4, 12)), int(rng.integers(2, 5))
        Z = rng.normal(0, 1, (n, d))
        w = rng.normal(0, 2, d)
        for loss in ("exponential", "logistic"):
            analytic, _ = dynamics.loss_gradient(Z, w, loss)
            numeric = np.zeros(d)
            for j in range(d):
                e = np.zeros(d)
                e[j] = h
                numeric[j] = (
                    dynamics.mean_loss(Z @ (w + e), loss)
                    - dynamics.mean_loss(Z @ (w - e), loss)
                ) / (2 * h)
            err = np.linalg.norm(analytic - numeric)
            scale = max(1.0, float(np.linalg.norm(analytic)))
            if err > 1e-5 * scale:
                failures.append(f"state {k} ({loss}): rel err {err / scale:.2e}")
    detail = "50 random states, both losses, h = 1e-6"
    if failures:
        detail += "; " + "; ".join(failures[:3])
    return CheckResult(12, "gradient-correctness", not failures, detail)


# -- 13 ---------------------------------------------------------------------


_DETERMINISM_CONFIG = """\
kind = "dynamics"

[output]
emit_svg = true

[dataset]
generator = "gen_2dim"
n = 16
exact_counts = true

[sweep]
p = [0.6, 0.9]
seeds = [0, 1]

[dynamics]
loss = "exponential"
mode = "flow"
checkpoints = [1.0, 10.0, 100.0]
verify_bounds = true
"""


def check_cli_determinism() -> CheckResult:
    """13: repeated CLI runs produce byte-identical CSV artifacts."""
    with tempfile.TemporaryDirectory() as tmp:
        tmp_path = Path(tmp)
        config = tmp_path / "run.toml"
        config.write_text(_DETERMINISM_CONFIG)
        codes = []
        for name in ("a", "b"):
            codes.append(cli.main([
                "dynamics", "--config", str(config),
                "--out", str(tmp_path / name),
            ]))
        if any(codes):
            return CheckResult(13, "cli-determinism", False,
                               f"non-zero exit status {codes}")
        mismatched = []
        files_a = sorted((tmp_path / "a").glob("*.csv"))
        if not files_a:
            return CheckResult(13, "cli-determinism", False, "no CSV output")
        for fa in files_a:
            fb = tmp_path / "b" / fa.name
            if not fb.exists() or fa.read_bytes() != fb.read_bytes():
                mismatched.append(fa.name)
        detail = f"{len(files_a)} CSV files compared byte-for-byte"
        if mismatched:
            detail += "; differing: " + ", ".join(mismatched)
        return CheckResult(13, "cli-determinism", not mismatched, detail)


CRITERIA: tuple[tuple[int, Callable[[], CheckResult]], ...] = (
    (1, check_qp_oracle_equivalence),
    (2, check_worked_geometric_instance),
    (3, check_geometric_sandwich_sweep),
    (4, check_balanced_mitigation),
    (5, check_closed_form_dynamics),
    (6, check_exponential_invariants),
    (7, check_logistic_invariants),
    (8, check_fig5a_ordering),
    (9, check_duplication_skew),
    (10, check_norm_growth),
    (11, check_highdim_accumulation),
    (12, check_gradient_correctness),
    (13, check_cli_determinism),
)


def run_check(number: int) -> CheckResult:
    fn = dict(CRITERIA)[number]
    start = time.perf_counter()
    result = fn()
    return CheckResult(result.number, result.name, result.passed,
                       result.detail, time.perf_counter() - start)


def run(selection: Iterable[int] | None = None, stream=None) -> int:
    stream = stream if stream is not None else sys.stdout
    numbers: Sequence[int] = sorted(selection) if selection else [n for n, _ in CRITERIA]
    ok = True
    for number in numbers:
        result = run_check(number)
        print(result.line, file=stream)
        ok = ok and result.passed
    return 0 if ok else 1
