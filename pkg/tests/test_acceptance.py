"""Acceptance criteria, one test each.  Every test prints a single
``[PASS]``/``[FAIL]`` line with the measured quantity and its threshold."""

import json

import numpy as np
import pytest

from lie2orbits.cli import RunConfig, run
from lie2orbits.coadjoint import coad_field, kks_closedness_residual, kks_value, orbit_chart
from lie2orbits.coadjoint import orbit_dimension_split, unit_covector
from lie2orbits.crossed_module import pair_module, semidirect, validate
from lie2orbits.double import coadjoint_double, double_check
from lie2orbits.examples import BUILTIN_NAMES, _derivation_dim_oracle, base_orbit_rank, builtin
from lie2orbits.lie_core import derivation_algebra, heisenberg, random_lie_algebra, so3
from lie2orbits.lie_core import structure_residuals
from lie2orbits.verify import (
    coisotropic_graph_check,
    flow_check,
    multiplicative_form_check,
    orbit_unit_compose_check,
    pi_sharp_morphism_check,
    target_poisson_check,
)


@pytest.fixture
def say(capsys):
    def _say(ok, label, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        return ok
    return _say


def _axiom_oracle(cm):
    """Both crossed-module identities by explicit loops over basis tuples."""
    h, g = cm.h, cm.g
    worst = 0.0
    for x in range(g.dim):
        for a in range(h.dim):
            xa = cm.act(g.basis(x), h.basis(a))
            lhs = cm.phi @ xa
            rhs = np.einsum("i,j,ijk->k", g.basis(x), cm.phi @ h.basis(a), g.c)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    for a in range(h.dim):
        for b in range(h.dim):
            lhs = cm.act(cm.phi @ h.basis(a), h.basis(b))
            rhs = np.einsum("i,j,ijk->k", h.basis(a), h.basis(b), h.c)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def test_ac1_crossed_module_axioms(say):
    worst_validate = max(validate(builtin(n).cm).max_residual() for n in BUILTIN_NAMES)
    worst_oracle = max(_axiom_oracle(builtin(n).cm) for n in BUILTIN_NAMES)
    ok = worst_validate < 1e-12 and worst_oracle < 1e-12
    assert say(ok, "AC1 crossed-module axioms",
               f"validate max {worst_validate:.2e}, loop oracle max {worst_oracle:.2e} (< 1e-12)")


def test_ac2_semidirect_soundness(say):
    worst_builtin = max(max(structure_residuals(semidirect(builtin(n).cm)).values())
                        for n in BUILTIN_NAMES)
    rng = np.random.default_rng(2024)
    worst_random = 0.0
    for i in range(100):
        L = random_lie_algebra(rng, 3 + i % 3)
        assert structure_residuals(L)["jacobi"] < 1e-10
        res = structure_residuals(semidirect(pair_module(L), tol=1e-10))
        worst_random = max(worst_random, max(res.values()))
    ok = worst_builtin < 1e-10 and worst_random < 1e-10
    assert say(ok, "AC2 semidirect soundness",
               f"builtins {worst_builtin:.2e}, 100 random pair modules {worst_random:.2e} (< 1e-10)")


def test_ac3_heisenberg_facts(say):
    b = builtin("heisenberg")
    der, _ = derivation_algebra(heisenberg())
    rank_z = base_orbit_rank(b.cm, b.points["default"])
    report = target_poisson_check(b.cm, b.points["zero-level"], 100)
    norm = report.meta["max_pushforward_norm"]
    ok = der.dim == 6 == _derivation_dim_oracle() and rank_z == 3 and norm < 1e-10
    assert say(ok, "AC3 Heisenberg facts",
               f"dim Der(h3) = {der.dim} (6), base rank at z* = {rank_z} (3), "
               f"zero-level pushforward norm {norm:.2e} (< 1e-10)")


def test_ac4_kks_so3(say):
    L = so3()
    xi = L.basis(2)
    entry = kks_value(L, xi, coad_field(L, L.basis(0), xi), coad_field(L, L.basis(1), xi))
    chart = orbit_chart(L, xi)
    rank = int(np.linalg.matrix_rank(chart.kks))
    rng = np.random.default_rng(4)
    closed = 0.0
    for _ in range(10):
        X, Y, Z = (v / np.linalg.norm(v) for v in rng.normal(size=(3, 3)))
        closed = max(closed, kks_closedness_residual(L, xi, X, Y, Z, step=1e-4))
    ok = abs(entry - 1.0) < 1e-12 and rank == 2 == chart.dim and closed < 1e-6
    assert say(ok, "AC4 KKS on so(3)",
               f"omega(e1, e2) at e3* = {entry!r} (1 +- 1e-12), rank {rank} (2), "
               f"closedness {closed:.2e} (< 1e-6)")


def test_ac5_multiplicativity(say):
    worst_mult = worst_coiso = 0.0
    verdicts_agree = True
    for name in ("pair-so3", "heisenberg"):
        b = builtin(name)
        for seed in (0, 1, 2):
            mult = multiplicative_form_check(b.cm, b.default_point, 200, 1e-9, seed)
            coiso = coisotropic_graph_check(b.cm, b.default_point, 200, 1e-9, seed)
            worst_mult = max(worst_mult, mult["multiplicativity"].residual)
            worst_coiso = max(worst_coiso, coiso["coisotropy"].residual)
            verdicts_agree &= mult.passed == coiso.passed
            verdicts_agree &= mult.passed and coiso.passed
    ok = worst_mult < 1e-9 and worst_coiso < 1e-9 and verdicts_agree
    assert say(ok, "AC5 multiplicativity",
               f"multiplicative residual {worst_mult:.2e}, coisotropy {worst_coiso:.2e} "
               f"(< 1e-9), verdicts agree: {verdicts_agree}")


def test_ac6_pi_sharp(say):
    worst = pairing = 0.0
    for name in BUILTIN_NAMES:
        report = pi_sharp_morphism_check(builtin(name).cm, 100, 1e-9, 0)
        worst = max(worst, report.max_residual([c.name for c in report.checks
                                                if c.name.startswith("pi_sharp")]))
        pairing = max(pairing, report["cotangent_pairing"].residual)
    ok = worst < 1e-9 and pairing < 1e-12
    assert say(ok, "AC6 pi-sharp morphism",
               f"max residual {worst:.2e} (< 1e-9), pairing identity {pairing:.2e} (< 1e-12)")


def test_ac7_dimension_split(say):
    rng = np.random.default_rng(7)
    mismatches = 0
    for name in BUILTIN_NAMES:
        cm = builtin(name).cm
        D = semidirect(cm)
        for _ in range(20):
            split = orbit_dimension_split(cm, rng.normal(size=cm.dim_h), rel_tol=1e-9,
                                          margin=1e3, D=D)
            mismatches += split["total_rank"] != split["core_rank"] + split["base_rank"]
    assert say(mismatches == 0, "AC7 orbit dimension split",
               f"{mismatches} mismatches of total = core + base over 60 stable unit points")


def test_ac8_double_groupoid(say):
    b = builtin("heisenberg")
    dg = coadjoint_double(b)
    report = double_check(dg, 100, 1e-9, 0)
    compose = orbit_unit_compose_check(dg, b.default_point, 100, 1e-9, 0)
    ok = report.passed and compose.passed
    assert say(ok, "AC8 double groupoid",
               f"axioms + interchange max {report.max_residual():.2e} (< 1e-9), "
               f"compose postconditions {compose.max_residual():.2e}, "
               f"orbit rank preserved: {compose['compose_orbit_rank'].passed}")


def test_ac9_flow_exactness(say):
    worst = 0.0
    for name in BUILTIN_NAMES:
        b = builtin(name)
        D = semidirect(b.cm)
        report = flow_check(D, unit_covector(b.cm, b.default_point), 50, 1e-8, 0, 1.0, 100)
        worst = max(worst, report["flow_exactness"].residual)
    assert say(worst < 1e-8, "AC9 flow exactness",
               f"RK4 vs matrix exponential max {worst:.2e} (< 1e-8), 150 cases")


def test_ac10_determinism(say, monkeypatch):
    outputs = []
    for threads in ("1", "1", "4"):
        monkeypatch.setenv("LIE2_ORBITS_THREADS", threads)
        lines = []
        for name in BUILTIN_NAMES:
            code, recs = run(RunConfig("report-all", f"builtin:{name}", n_samples=30, seed=3))
            assert code == 0
            lines += recs
        outputs.append("\n".join(lines).encode())
    ok = outputs[0] == outputs[1] == outputs[2]
    n_records = sum(1 for line in outputs[0].splitlines() if json.loads(line))
    assert say(ok, "AC10 determinism",
               f"{n_records} report-all records byte-identical across 2 serial runs "
               f"and a 4-thread run: {ok}")
