"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v`; the lines are printed in the
terminal summary (and to stdout when run as a script).
"""
import math
import time

import numpy as np
import pytest

from kzlab import elliptic as el
from kzlab import kz, master, qkz, selberg, sl2, trigdyn, uq


class Criterion:
    def __init__(self, number, limit, reporter):
        self.number, self.limit, self.reporter = number, limit, reporter
        self.parts = []

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def check(self, name, ok, value):
        self.parts.append((name, bool(ok), value))

    def __exit__(self, *exc):
        elapsed = time.perf_counter() - self.t0
        if exc[0] is not None:
            self.parts.append((f"error {exc[0].__name__}: {exc[1]}", False, None))
        self.parts.append(("runtime", elapsed <= self.limit, elapsed))
        ok = all(p[1] for p in self.parts)
        detail = "; ".join(f"{n}={v:.2e}{'' if o else ' FAIL'}" if isinstance(v, float)
                           else f"{n}{'' if o else ' FAIL'}" for n, o, v in self.parts if n != "runtime")
        self.reporter(self.number, ok, elapsed, self.limit, detail)
        self.passed = ok
        return False


def _run(number, limit, acceptance):
    return Criterion(number, limit, acceptance)


def test_criterion_01_selberg(acceptance):
    with _run(1, 60, acceptance) as c:
        worst = 0.0
        for k in (1, 2):
            for a in (0.5, 1.0, 1.7):
                for b in (0.5, 1.0, 1.7):
                    for cc in (0.0, 0.5, 1.0):
                        p = selberg.SelbergParams(k, a, b, cc)
                        num, cl = selberg.selberg_numeric(p), selberg.selberg_closed(p)
                        worst = max(worst, abs(num - cl) / abs(cl))
        c.check("max_gap", worst <= 1e-6, worst)
    assert c.passed


def test_criterion_02_kz_hypergeometric(acceptance):
    with _run(2, 30, acceptance) as c:
        res, sing = 0.0, 0.0
        m_all, z_all = (-1.3, -0.7, -2.1), (0.0, 1.0, 2.7)
        for n in (2, 3):
            system = kz.KZSystem(sl2.VermaTensorSpace(m_all[:n], 2), 1, 3.0)
            for i in range(2, n + 1):
                cyc = kz.interval_cycle(i)
                vec = kz.hypergeometric_solution(system, cyc, z_all[:n])
                sing = max(sing, kz.singular_identity_residual(system, vec))
                res = max(res, max(kz.kz_residual(system, cyc, z_all[:n], j) for j in range(n)))
        c.check("kz_residual", res <= 1e-6, res)
        c.check("singular_identity", sing <= 1e-7, sing)
    assert c.passed


def test_criterion_03_determinants(acceptance):
    with _run(3, 60, acceptance) as c:
        _, _, gap = kz.euler_determinant_check((0.0, 1.0, 2.5), (0.4, 0.7, 1.3))
        c.check("euler_det", gap <= 1e-7, gap)
        system = kz.KZSystem(sl2.VermaTensorSpace((-1.3, -0.7, -2.1), 2), 1, 3.0)
        obs, pred = kz.solution_determinant_check(system, (0.0, 1.0, 2.7))
        g2 = float(np.max(np.abs(obs - pred)) / np.max(np.abs(pred)))
        c.check("solution_det", g2 <= 1e-6, g2)
    assert c.passed


def test_criterion_04_bethe(acceptance):
    with _run(4, 120, acceptance) as c:
        m, z = (-1.3, -0.7, -2.1), (0.0, 1.0, 2.5)
        counts, eig, norm = True, 0.0, 0.0
        for k, n in ((1, 2), (1, 3), (2, 2), (2, 3)):
            inst = master.MasterInstance(k, z[:n], m[:n])
            orbits, _ = master.find_critical_orbits(inst)
            counts &= len(orbits) == math.comb(k + n - 2, n - 2)
            for o in orbits:
                eig = max(eig, master.bethe_eigen_residual(inst, o))
                norm = max(norm, master.norm_hessian_check(inst, o)[2])
        cube = 0.0
        for k in (1, 2, 3):
            inst = master.MasterInstance(k, (0.0, 1.0), (-1.3, -0.7))
            o = master.find_critical_orbits(inst)[0][0]
            s, h, _ = master.norm_hessian_check(inst, o)
            closed = master.two_point_norm_closed(-1.3, -0.7, k)
            cube = max(cube, abs(s - closed) / abs(closed), abs(h - closed) / abs(closed))
        c.check("orbit_counts", counts, None)
        c.check("eigen_residual", eig <= 1e-8, eig)
        c.check("norm_hessian", norm <= 1e-8, norm)
        c.check("cube_formula", cube <= 1e-8, cube)
        cls = [master.classify_critical_set((1, 1, 1), k, (0.0, 1.0, 2.5), rng=0, nstarts=200)["orbits"]
               for k in (1, 2, 5, 6)]
        c.check("classification_(2,0,0,0)", cls == [2, 0, 0, 0], None)
    assert c.passed


def test_criterion_05_heine_stieltjes(acceptance):
    with _run(5, 10, acceptance) as c:
        m, z = (-1.3, -0.7, -2.1), (0.0, 1.0, 2.5)
        inst = master.MasterInstance(2, z, m)
        orbits, _ = master.find_critical_orbits(inst)
        rem = max(master.heine_stieltjes(o.t, z, m, tol=1.0)[2] for o in orbits)
        c.check("remainder", rem <= 1e-8, rem)
    assert c.passed


def test_criterion_06_yang_baxter(acceptance):
    with _run(6, 20, acceptance) as c:
        sp = uq.QVermaTensorSpace.make((1.3, 0.7, 2.2), 3.7, depth=2)
        ybe = max(uq.ybe_residual(sp, k) for k in range(3))
        braid = max(max(uq.braid_relation_residuals(sp, k).values()) for k in range(3))
        inter = max(uq.intertwiner_residual(sp, k, i) for k in range(3) for i in range(2))
        c.check("ybe", ybe <= 1e-12, ybe)
        c.check("braid", braid <= 1e-12, braid)
        c.check("intertwiner", inter <= 1e-12, inter)
        disp = max(uq.compare_value_tables(uq.pr_two_factor_values(m, l, 3.7), uq.pr_displayed_values(m, l, 3.7))
                   for m, l in ((1.3, 0.7), (2.0, 3.0), (0.4, 1.9)))
        c.check("pr_displayed_values", disp <= 1e-12, disp)
    assert c.passed


def test_criterion_07_kohno_drinfeld(acceptance):
    with _run(7, 120, acceptance) as c:
        m, z = (-1.3, -0.7, -2.1), (0.0, 1.0, 2.5)
        gap = 0.0
        for n in (2, 3):
            for r in uq.kohno_drinfeld_compare(m[:n], 5.3, z=z[:n]):
                gap = max(gap, r["gap"])
        c.check("eigenvalue_gap", gap <= 1e-4, gap)
    assert c.passed


def test_criterion_08_trigonometric(acceptance):
    with _run(8, 30, acceptance) as c:
        sp = sl2.VermaTensorSpace((1.3, 0.7), 3)
        system = trigdyn.TrigKZSystem(sp, 2.3, 0.7)
        z = np.array([1.0, 2.1])
        comp = max(max(trigdyn.dynamical_compatibility_check(system, z, i, k)) for k in range(3) for i in range(2))
        c.check("compatibility", comp <= 1e-10, comp)
        prod = 0.0
        for mm in (1.3, 0.7):
            one = sl2.VermaTensorSpace((mm,), 3)
            for k in range(4):
                P = trigdyn.p_lambda_operator(one, k, 0.7)[0, 0]
                prod = max(prod, abs(P - trigdyn.p_lambda_on_single(mm, k, 0.7)) / abs(P))
        c.check("p_lambda_product", prod <= 1e-12, prod)
        sol = max(max(trigdyn.selberg_solution_check(1.7, k, 2.3, 0.7)) for k in (1, 2, 3))
        c.check("selberg_solution", sol <= 1e-8, sol)
    assert c.passed


def test_criterion_09_qkz(acceptance):
    with _run(9, 180, acceptance) as c:
        conn = qkz.QKZConnection((0.5, 0.5, 0.5), 1.7, 0.4, irreducible=(True, True, True))
        z = np.array([0.3, 1.1, 2.6], dtype=complex)
        flat = max(qkz.flatness_residual(conn, z, i, j, k) for k in (1, 2, 3) for i, j in ((0, 1), (0, 2), (1, 2)))
        c.check("flatness", flat <= 1e-10, flat)
        disp = max(float(np.max(np.abs(qkz.spin_half_from_f_space(x) - qkz.spin_half_r(x))))
                   for x in (0.37, -1.9, 2.4))
        c.check("r_display", disp <= 1e-10, disp)
        pts = ((0.3, 0.5, 0.7, 0.9), (1.1, 0.4, 0.6, 0.2), (0.25, 0.25, 0.8, 1.3),
               (0.6, 1.7, 0.35, 0.45), (2.1, 0.9, 1.4, 0.3))
        barnes = max(qkz.barnes_integral(*q)[2] for q in pts)
        c.check("barnes", barnes <= 1e-7, barnes)
        zz = np.array([0.2 + 0.3j, 0.1 - 0.4j])
        sol = max(qkz.qkz_solution_residual(zz, (-0.6, -0.7), -0.5, 1, j) for j in range(2))
        c.check("solution_residual", sol <= 1e-6, sol)
    assert c.passed


def test_criterion_10_elliptic(acceptance):
    with _run(10, 60, acceptance) as c:
        rng = np.random.default_rng(10)
        lam = rng.uniform(-1, 1, 10) + 1j * rng.uniform(-0.4, 0.4, 10)
        heat = 0.0
        for kappa in range(1, 7):
            for n in range(2 * kappa):
                tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.6, 1.6))
                heat = max(heat, el.heat_residual(n, kappa, lam, tau))
        c.check("heat", heat <= 1e-10, heat)
        tau = 0.3 + 1.1j
        st = max(max(el.modular_s_check(n, k, 0.3 + 0.1j, tau), el.modular_t_residual(n, k, lam, tau))
                 for k in range(1, 5) for n in range(2 * k))
        st = max(st, el.modular_s_check(0, 1, 0.3, 1j), el.theta_modular_s_check(0.3 + 0.1j, tau))
        c.check("modular_S_T", st <= 1e-8, st)
        kzb = max(el.kzb_residual(*el.theta_power_jet(p, lam, tau), lam, tau, p, 2 * p + 2) for p in (1, 2))
        c.check("theta_power_kzb", kzb <= 1e-7, kzb)
        _, res, E = el.lame_hermite_check(0.4, 2j)
        var = float(np.max(np.abs(E - E.mean())))
        c.check("lame_residual", res <= 1e-7, res)
        c.check("E_variance", var <= 1e-7, var)
    assert c.passed


def test_criterion_11_macdonald(acceptance):
    with _run(11, 10, acceptance) as c:
        K, _ = el.q_field()
        c.check("P0", all(el.macdonald_poly(0, k) == el.QLaurent.monomial(0) for k in range(4)), None)
        c.check("Pn0", all(el.macdonald_poly(n, 0) == el.QLaurent({n: K.one, -n: K.one}) for n in range(1, 5)), None)
        c.check("P22", el.macdonald_poly(2, 2) == el.p22_expected(), None)
        c.check("askey_ismail", all(el.shift_operator_check(n, k) for n in range(1, 5) for k in range(3)), None)
    assert c.passed


def test_criterion_12_resonance(acceptance):
    with _run(12, 20, acceptance) as c:
        m, z = (1.3, 0.7, 2.1), (0.0, 1.0, 2.5)
        res = {}
        for label, kap in (("resonant", sum(m)), ("off", sum(m) + 0.7)):
            system = kz.KZSystem(sl2.VermaTensorSpace(m, 2), 1, kap)
            res[label] = max(kz.resonance_membership(system, kz.interval_cycle(i), z) for i in (2, 3))
        c.check("resonant", res["resonant"] <= 1e-7, res["resonant"])
        c.check("off_resonant", res["off"] >= 1e-2, res["off"])
    assert c.passed


if __name__ == "__main__":
    import sys
    lines = {}

    def rec(n, ok, el_, lim, det):
        lines[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  ({el_:.1f}s / {lim}s)  {det}"
        print(lines[n], flush=True)

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion"):
            try:
                fn(rec)
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
