"""Experiment harness: named runs of the checks with CSV/JSON output.

    kzlab list
    kzlab run <name> [--config FILE] [--out DIR] [--<param> VALUE ...]
    kzlab verify-all [--tol-scale X] [--out DIR]

Exit codes: 0 all checks pass, 1 a check failed, 2 usage error.
KZLAB_WORKERS sets the number of worker processes for verify-all.
"""
import argparse
from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass, field
import difflib
import json
import math
import os
from pathlib import Path
import sys
import time

import numpy as np

DEFAULT_SEED = 20240611
WORKERS_ENV = "KZLAB_WORKERS"


class UsageError(Exception):
    """Bad experiment name, parameter or config file (exit code 2)."""


# ---------------------------------------------------------------------------
# records

@dataclass
class Check:
    name: str
    value: float
    tol: float
    kind: str = "le"   # "le": value <= tol, "ge": value >= tol, "eq": value is True

    @property
    def passed(self):
        if self.kind == "eq":
            return bool(self.value)
        if not np.isfinite(self.value):
            return False
        return self.value <= self.tol if self.kind == "le" else self.value >= self.tol

    def to_record(self):
        v = bool(self.value) if self.kind == "eq" else float(self.value)
        return {"check": self.name, "value": v, "tol": self.tol, "kind": self.kind,
                "passed": self.passed}


@dataclass
class Outcome:
    rows: list
    checks: list
    plot: list = field(default_factory=list)


@dataclass(frozen=True)
class Experiment:
    name: str
    tag: str
    summary: str
    func: object
    params: dict
    tolerances: dict
    criterion: int = None


@dataclass
class ExperimentConfig:
    name: str
    params: dict
    tolerances: dict
    seed: int = DEFAULT_SEED
    out: str = None


def _scaled(tol, kind, scale):
    if kind == "le":
        return tol * scale
    if kind == "ge":
        return tol / scale
    return tol


# ---------------------------------------------------------------------------
# experiments

def _selberg_grid(p, tol, seed):
    from .selberg import SelbergParams, selberg_numeric, selberg_closed
    rows, plot, worst = [], [], 0.0
    for k in p["k"]:
        for a in p["a"]:
            for b in p["b"]:
                for c in p["c"]:
                    sp = SelbergParams(k, a, b, c)
                    num = float(np.real(selberg_numeric(sp)))
                    cl = float(np.real(selberg_closed(sp)))
                    gap = abs(num - cl) / abs(cl)
                    worst = max(worst, gap)
                    rows.append({"k": k, "a": a, "b": b, "c": c, "numeric": num, "closed": cl, "gap": gap})
                    plot.append({"x": c, "y": gap, "series": f"k={k} a={a} b={b}"})
    return Outcome(rows, [Check("max_gap", worst, tol["gap"])], plot)


def _selberg_contiguous(p, tol, seed):
    from .selberg import SelbergParams, selberg_numeric, contiguous_ratio
    rows, worst = [], 0.0
    for k in p["k"]:
        a, b, c = p["a"], p["b"], p["c"]
        r = selberg_numeric(SelbergParams(k, a + 1, b, c)) / selberg_numeric(SelbergParams(k, a, b, c))
        pred = contiguous_ratio(k, a, b, c)
        gap = abs(r - pred) / abs(pred)
        worst = max(worst, gap)
        rows.append({"k": k, "ratio": float(np.real(r)), "predicted": pred, "gap": gap})
    return Outcome(rows, [Check("max_gap", worst, tol["gap"])])


def _mehta_limit(p, tol, seed):
    from .selberg import mehta_gaussian
    rows, worst = [], 0.0
    for k in p["k"]:
        for c in p["c"]:
            num, cl, gap = mehta_gaussian(k, p["a"], c)
            worst = max(worst, gap)
            rows.append({"k": k, "c": c, "numeric": float(num), "closed": float(np.real(cl)), "gap": gap})
    return Outcome(rows, [Check("max_gap", worst, tol["gap"])])


def _gauss_2f1(p, tol, seed):
    from .numerics import gauss_2f1
    rows, worst = [], 0.0
    a, b, c = p["a"], p["b"], p["c"]
    for z in p["z"]:
        s = gauss_2f1(a, b, c, z, method="series")
        e = gauss_2f1(a, b, c, z, method="euler")
        gap = abs(s - e) / abs(s)
        worst = max(worst, gap)
        rows.append({"z": z, "series": float(np.real(s)), "euler": float(np.real(e)), "gap": gap})
    from scipy.special import hyp2f1
    g = gauss_2f1(a, b, c, 1.0, method="gauss")
    ref = hyp2f1(a, b, c, 1.0)
    rows.append({"z": 1.0, "series": float(np.real(g)), "euler": float(ref), "gap": abs(g - ref) / abs(ref)})
    return Outcome(rows, [Check("series_vs_euler", worst, tol["gap"]),
                          Check("gauss_value", abs(g - ref) / abs(ref), tol["gauss"])])


def _kz_interval(p, tol, seed):
    from . import kz, sl2
    rows, res_w, sing_w = [], 0.0, 0.0
    for n in p["n"]:
        m, z = p["m"][:n], p["z"][:n]
        system = kz.KZSystem(sl2.VermaTensorSpace(tuple(m), 2), 1, p["kappa"])
        for ci in range(2, n + 1):
            cyc = kz.interval_cycle(ci)
            vec = kz.hypergeometric_solution(system, cyc, z)
            s = kz.singular_identity_residual(system, vec)
            r = max(kz.kz_residual(system, cyc, z, i) for i in range(n))
            res_w, sing_w = max(res_w, r), max(sing_w, s)
            rows.append({"n": n, "cycle": ci, "kz_residual": r, "singular_identity": s})
    return Outcome(rows, [Check("kz_residual", res_w, tol["kz_residual"]),
                          Check("singular_identity", sing_w, tol["singular_identity"])])


def _euler_determinant(p, tol, seed):
    from . import kz
    det, closed, gap = kz.euler_determinant_check(p["z"], p["alpha"])
    rows = [{"numeric": float(det), "closed": float(closed), "gap": gap}]
    return Outcome(rows, [Check("gap", gap, tol["gap"])])


def _solution_determinant(p, tol, seed):
    from . import kz, sl2
    system = kz.KZSystem(sl2.VermaTensorSpace(tuple(p["m"]), 2), 1, p["kappa"])
    obs, pred = kz.solution_determinant_check(system, p["z"])
    gap = float(np.max(np.abs(obs - pred)) / np.max(np.abs(pred)))
    rows = [{"i": i + 1, "observed": float(np.real(o)), "predicted": float(np.real(q))}
            for i, (o, q) in enumerate(zip(obs, pred))]
    return Outcome(rows, [Check("log_derivative_gap", gap, tol["gap"])])


def _bethe_counts(p, tol, seed):
    from . import master
    rows, eig_w, norm_w, counts_ok = [], 0.0, 0.0, True
    for k, n in p["cases"]:
        inst = master.MasterInstance(k, p["z"][:n], p["m"][:n], 1.0)
        orbits, _ = master.find_critical_orbits(inst)
        expected = math.comb(k + n - 2, n - 2)
        counts_ok &= len(orbits) == expected
        for o in orbits:
            eig_w = max(eig_w, master.bethe_eigen_residual(inst, o))
            norm_w = max(norm_w, master.norm_hessian_check(inst, o)[2])
        rows.append({"k": k, "n": n, "orbits": len(orbits), "expected": expected})
    return Outcome(rows, [Check("orbit_counts", counts_ok, 0, "eq"),
                          Check("eigen_residual", eig_w, tol["eigen"]),
                          Check("norm_hessian", norm_w, tol["norm"])])


def _two_point_norm(p, tol, seed):
    from . import master
    m1, m2 = p["m"]
    rows, worst = [], 0.0
    for k in p["k"]:
        inst = master.MasterInstance(k, (0.0, 1.0), (m1, m2), 1.0)
        orbits, _ = master.find_critical_orbits(inst)
        o = orbits[0]
        norm, hess, _ = master.norm_hessian_check(inst, o)
        closed = master.two_point_norm_closed(m1, m2, k)
        gap = max(abs(norm - closed), abs(hess - closed)) / abs(closed)
        worst = max(worst, gap)
        rows.append({"k": k, "shapovalov": float(np.real(norm)), "hessian": float(np.real(hess)),
                     "closed": float(closed), "gap": float(gap)})
    return Outcome(rows, [Check("cube_formula", worst, tol["gap"])])


def _classification(p, tol, seed):
    from . import master
    rows, ok = [], True
    for k, expected in zip(p["k"], p["expected"]):
        out = master.classify_critical_set(p["m"], k, p["z"], rng=seed, nstarts=p["nstarts"])
        ok &= out["orbits"] == expected
        rows.append({"k": k, "case": out["case"], "orbits": out["orbits"], "expected": expected,
                     "multiplicity": out["multiplicity"]})
    return Outcome(rows, [Check("counts", ok, 0, "eq")])


def _heine_stieltjes(p, tol, seed):
    from . import master
    inst = master.MasterInstance(p["k"], p["z"], p["m"], 1.0)
    orbits, _ = master.find_critical_orbits(inst)
    rows, worst = [], 0.0
    for o in orbits:
        _, H, rem = master.heine_stieltjes(o.t, p["z"], p["m"], tol=1.0)
        worst = max(worst, rem)
        rows.append({"t": repr(tuple(np.round(o.t, 12))), "remainder": rem,
                     "H": repr(tuple(np.round(H, 12)))})
    return Outcome(rows, [Check("remainder", worst, tol["remainder"]),
                          Check("orbits_found", len(orbits) > 0, 0, "eq")])


def _selberg_critical(p, tol, seed):
    from . import master
    k, a, b, g = p["k"], p["alpha"], p["beta"], p["gamma"]
    lam = master.selberg_critical_symmetric(k, a, b, g)
    closed = master.selberg_lambda_closed(k, a, b, g)
    t = master.selberg_critical_point(k, a, b, g)
    grad = [a / t[i] + b / (t[i] - 1) + sum(2 * g / (t[i] - t[j]) for j in range(k) if j != i)
            for i in range(k)]
    gap = float(np.max(np.abs(np.asarray(lam) - np.asarray(closed))))
    rows = [{"j": j + 1, "recurrence": float(np.real(x)), "closed": float(np.real(y))}
            for j, (x, y) in enumerate(zip(lam, closed))]
    return Outcome(rows, [Check("closed_vs_recurrence", gap, tol["gap"]),
                          Check("gradient", float(np.max(np.abs(grad))), tol["grad"])])


def _yang_baxter(p, tol, seed):
    from . import uq
    sp = uq.QVermaTensorSpace.make(tuple(p["m"]), p["kappa"], depth=p["depth"])
    rows, ybe, braid, inter = [], 0.0, 0.0, 0.0
    for k in range(p["depth"] + 1):
        y = uq.ybe_residual(sp, k)
        b = max(uq.braid_relation_residuals(sp, k).values())
        it = max(uq.intertwiner_residual(sp, k, i, rng=seed) for i in range(sp.n - 1))
        ybe, braid, inter = max(ybe, y), max(braid, b), max(inter, it)
        rows.append({"k": k, "ybe": y, "braid": b, "intertwiner": it})
    return Outcome(rows, [Check("ybe", ybe, tol["ybe"]), Check("braid", braid, tol["braid"]),
                          Check("intertwiner", inter, tol["intertwiner"])])


def _pr_values(p, tol, seed):
    from . import uq
    rows, disp_w, der_w = [], 0.0, 0.0
    for m, l in p["pairs"]:
        comp = uq.pr_two_factor_values(m, l, p["kappa"])
        disp = uq.compare_value_tables(comp, uq.pr_displayed_values(m, l, p["kappa"]))
        der = uq.compare_value_tables(comp, uq.pr_derived_values(m, l, p["kappa"]))
        disp_w, der_w = max(disp_w, disp), max(der_w, der)
        rows.append({"m": m, "l": l, "gap_displayed": disp, "gap_derived": der})
    return Outcome(rows, [Check("displayed_values", disp_w, tol["values"]),
                          Check("derived_values", der_w, tol["values"])])


def _quantum_sing_sign(p, tol, seed):
    from . import uq
    sp = uq.QVermaTensorSpace.make(tuple(p["m"]), p["kappa"], depth=2)
    res = uq.sing_sign_from_invariance(sp)
    rows = [{"sign": s, "invariance_residual": v} for s, v in sorted(res.items())]
    return Outcome(rows, [Check("plus_sign_invariant", res[1], tol["invariance"])])


def _kohno_drinfeld(p, tol, seed):
    from . import uq
    n = int(p["n"])
    ns = [n] if n else [2, 3]
    rows, worst = [], 0.0
    for nn in ns:
        recs = uq.kohno_drinfeld_compare(p["m"][:nn], p["kappa"], z=p["z"][:nn], nseg=p["nseg"])
        for r in recs:
            worst = max(worst, r["gap"])
            for a, b in r["pairs"]:
                rows.append({"n": nn, "generator": r["generator"], "kz_re": float(np.real(a)),
                             "kz_im": float(np.imag(a)), "r_re": float(np.real(b)),
                             "r_im": float(np.imag(b)), "gap": float(abs(a - b))})
    return Outcome(rows, [Check("max_gap", worst, tol["gap"])])


def _trig_dynamical(p, tol, seed):
    from . import sl2, trigdyn
    sp = sl2.VermaTensorSpace(tuple(p["m"]), 3)
    system = trigdyn.TrigKZSystem(sp, p["kappa"], p["lam"])
    z = np.array(p["z"], dtype=complex)
    rows, worst, exact = [], 0.0, 0.0
    for k in range(p["kmax"] + 1):
        for i in range(sp.n):
            w, c = trigdyn.dynamical_compatibility_check(system, z, i, k)
            worst = max(worst, w, c)
            rows.append({"k": k, "i": i + 1, "compatibility": w, "commutator": c})
    for mm in p["m"]:
        one = sl2.VermaTensorSpace((mm,), 3)
        for k in range(4):
            P = trigdyn.p_lambda_operator(one, k, p["lam"])
            exact = max(exact, abs(P[0, 0] - trigdyn.p_lambda_on_single(mm, k, p["lam"])) / abs(P[0, 0]))
    return Outcome(rows, [Check("compatibility", worst, tol["compat"]),
                          Check("p_lambda_product", exact, tol["product"])])


def _trig_selberg(p, tol, seed):
    from . import trigdyn
    rows, worst = [], 0.0
    for k in p["k"]:
        t, d = trigdyn.selberg_solution_check(p["m"], k, p["kappa"], p["lam"])
        worst = max(worst, t, d)
        rows.append({"k": k, "trig_residual": t, "dynamical_residual": d})
    return Outcome(rows, [Check("both_equations", worst, tol["residual"])])


def _trig_flatness(p, tol, seed):
    from . import sl2, trigdyn
    sp = sl2.VermaTensorSpace(tuple(p["m"]), 3)
    system = trigdyn.TrigKZSystem(sp, p["kappa"], p["lam"])
    z = np.array(p["z_re"]) + 1j * np.array(p["z_im"])
    rows, worst = [], 0.0
    for k in range(3):
        r = trigdyn.trig_flatness_residual(system, z, 0, 1, k)
        worst = max(worst, r)
        rows.append({"k": k, "curvature": r})
    return Outcome(rows, [Check("curvature", worst, tol["curvature"])])


def _qkz_flatness(p, tol, seed):
    from . import qkz
    conn = qkz.QKZConnection(tuple(p["m"]), p["p"], p["mu"], irreducible=(True,) * len(p["m"]))
    z = np.array(p["z"], dtype=complex)
    rows, worst = [], 0.0
    for k in range(1, len(p["m"]) + 1):
        for i in range(len(p["m"])):
            for j in range(i + 1, len(p["m"])):
                r = qkz.flatness_residual(conn, z, i, j, k)
                worst = max(worst, r)
                rows.append({"k": k, "i": i + 1, "j": j + 1, "residual": r})
    return Outcome(rows, [Check("flatness", worst, tol["flatness"])])


def _qkz_r_matrix(p, tol, seed):
    from . import qkz
    rows, disp, ybe = [], 0.0, 0.0
    for x in p["x"]:
        g = float(np.max(np.abs(qkz.spin_half_from_f_space(x) - qkz.spin_half_r(x))))
        disp = max(disp, g)
        rows.append({"x": x, "display_gap": g})
    for k in (1, 2):
        ybe = max(ybe, qkz.qybe_residual(tuple(p["m"]), tuple(p["points"]), k))
    return Outcome(rows, [Check("display", disp, tol["display"]), Check("qybe", ybe, tol["qybe"])])


def _barnes(p, tol, seed):
    from . import qkz
    rows, worst = [], 0.0
    for a, b, c, d in p["points"]:
        num, cl, gap = qkz.barnes_integral(a, b, c, d)
        worst = max(worst, gap)
        rows.append({"a": a, "b": b, "c": c, "d": d, "numeric": float(np.real(num)),
                     "closed": float(np.real(cl)), "gap": gap})
    return Outcome(rows, [Check("max_gap", worst, tol["gap"])])


def _qkz_solution(p, tol, seed):
    from . import qkz
    rows, worst = [], 0.0
    z = np.array(p["z_re"]) + 1j * np.array(p["z_im"])
    for j in range(len(z)):
        r = qkz.qkz_solution_residual(z, p["m"], p["p"], 1, j)
        worst = max(worst, r)
        rows.append({"j": j + 1, "residual": r})
    return Outcome(rows, [Check("qkz_residual", worst, tol["residual"])])


def _qkz_determinant(p, tol, seed):
    from . import qkz
    num, cl, gap = qkz.q_determinant_two_point(p["z"], p["m"], p["p"])
    rows = [{"numeric_re": float(np.real(num)), "numeric_im": float(np.imag(num)),
             "closed_re": float(np.real(cl)), "closed_im": float(np.imag(cl)), "gap": gap}]
    return Outcome(rows, [Check("gap", gap, tol["gap"])])


def _qkz_classical(p, tol, seed):
    from . import qkz
    conn = qkz.QKZConnection(tuple(p["m"]), p["p"])
    rows, plot = [], []
    for S in p["S"]:
        dev, _ = qkz.classical_limit(conn, np.array(p["Z"], dtype=complex), 0, 1, S, 0.0)
        rows.append({"S": S, "deviation": dev})
        plot.append({"x": S, "y": dev, "series": "deviation"})
    return Outcome(rows, [Check("largest_S", rows[-1]["deviation"], tol["deviation"])], plot)


def _sample_lam(seed, n):
    rng = np.random.default_rng(seed)
    return rng.uniform(-1, 1, n) + 1j * rng.uniform(-0.4, 0.4, n)


def _theta_heat(p, tol, seed):
    from . import elliptic as el
    lam = _sample_lam(seed, p["npts"])
    rng = np.random.default_rng(seed + 1)
    rows, worst = [], 0.0
    for kappa in range(1, p["kappa_max"] + 1):
        for n in range(2 * kappa):
            r = max(el.heat_residual(n, kappa, lam, complex(rng.uniform(-0.5, 0.5), rng.uniform(0.6, 1.6)))
                    for _ in range(2))
            worst = max(worst, r)
            rows.append({"kappa": kappa, "n": n, "heat_residual": r})
    first = el.theta_heat_residual(lam, 0.2 + 1.1j)
    rows.append({"kappa": 2, "n": -1, "heat_residual": first})
    return Outcome(rows, [Check("heat", max(worst, first), tol["heat"])])


def _theta_modular(p, tol, seed):
    from . import elliptic as el
    rows, s_w, t_w = [], 0.0, 0.0
    tau = complex(*p["tau"])
    lam = complex(*p["lam"])
    for kappa in range(1, p["kappa_max"] + 1):
        for n in range(2 * kappa):
            s = el.modular_s_check(n, kappa, lam, tau)
            t = el.modular_t_residual(n, kappa, lam, tau)
            s_w, t_w = max(s_w, s), max(t_w, t)
            rows.append({"kappa": kappa, "n": n, "S": s, "T": t})
    first = el.theta_modular_s_check(lam, tau)
    base = el.modular_s_check(0, 1, 0.3, 1j)
    s2 = el.s_squared_scalar(1, 3, lam, tau)
    rows.append({"kappa": 2, "n": -1, "S": first, "T": float(abs(el.theta(lam, tau + 1) - np.exp(1j * np.pi / 4) * el.theta(lam, tau)))})
    return Outcome(rows, [Check("S", max(s_w, first, base), tol["modular"]),
                          Check("T", t_w, tol["modular"]),
                          Check("S_squared_unit_scalar", abs(abs(s2) - 1), tol["modular"])])


def _kzb_theta_power(p, tol, seed):
    from . import elliptic as el
    lam = _sample_lam(seed, 6)
    tau = complex(*p["tau"])
    rows, worst = [], 0.0
    for pp in p["p"]:
        r = el.kzb_residual(*el.theta_power_jet(pp, lam, tau), lam, tau, pp, 2 * pp + 2)
        worst = max(worst, r)
        rows.append({"p": pp, "kappa": 2 * pp + 2, "residual": r})
    neg = el.kzb_residual(np.ones_like(lam), 0 * lam, 0 * lam, lam, tau, 1, 4)
    rows.append({"p": 1, "kappa": 4, "residual": neg})
    return Outcome(rows, [Check("theta_power", worst, tol["kzb"]),
                          Check("constant_negative_control", neg, tol["negative"], "ge")])


def _kzb_integral(p, tol, seed):
    from . import elliptic as el
    tau = complex(*p["tau"])
    rows, worst = [], 0.0
    for mu in p["mu"]:
        r = el.kzb_p1_residual(p["lam"], tau, p["kappa"], mu)
        worst = max(worst, r)
        rows.append({"mu": mu, "residual": r})
    u = el.kzb_p1_symmetrized
    par = abs(u(p["lam"], tau, p["kappa"], p["mu"][0]) - u(-p["lam"], tau, p["kappa"], p["mu"][0]))
    return Outcome(rows, [Check("kzb_residual", worst, tol["kzb"]), Check("parity", par, tol["parity"])])


def _conformal_blocks(p, tol, seed):
    from . import elliptic as el
    tau = complex(*p["tau"])
    lam = _sample_lam(seed, 4)
    rows, worst = [], 0.0
    for pp, kappa in p["cases"]:
        for n in range(kappa - 2 * pp - 1):
            r = el.conformal_block_conditions(pp, kappa, n, lam, tau)
            worst = max(worst, max(r))
            rows.append({"p": pp, "kappa": kappa, "n": n, "period_2": r[0], "period_2tau": r[1],
                         "parity": r[2], "zero_order": r[3]})
    ranks = [el.symmetric_theta_rank(k, tau) == k + 1 for k in range(1, 6)]
    return Outcome(rows, [Check("conditions", worst, tol["conditions"]),
                          Check("symmetric_rank", all(ranks), 0, "eq")])


def _lame(p, tol, seed):
    from . import elliptic as el
    tau = complex(*p["tau"])
    t0, res, E = el.lame_hermite_check(p["mu"], tau)
    wp0 = el.wp_from_theta(t0, tau)
    z = _sample_lam(seed, 5) * 0.8 + 0.1 + 0.1j
    wp_gap = float(np.max(np.abs(el.wp_lattice(z, tau) - el.wp_from_theta(z, tau))))
    var = float(np.max(np.abs(E - np.mean(E))))
    rows = [{"t0_re": float(np.real(t0)), "t0_im": float(np.imag(t0)), "E_re": float(np.real(np.mean(E))),
             "wp_t0": float(np.real(wp0)), "eigen_residual": res, "E_spread": var, "wp_two_ways": wp_gap}]
    return Outcome(rows, [Check("eigen_residual", res, tol["eigen"]),
                          Check("E_variance", var, tol["eigen"]),
                          Check("wp_two_ways", wp_gap, tol["wp"])])


def _macdonald(p, tol, seed):
    from . import elliptic as el
    rows = []
    p0 = all(el.macdonald_poly(0, k) == el.QLaurent.monomial(0) for k in range(4))
    pn0 = all(el.macdonald_poly(n, 0) == el.QLaurent({n: el.q_field()[0].one, -n: el.q_field()[0].one})
              for n in range(1, 5))
    p22 = el.macdonald_poly(2, 2) == el.p22_expected()
    ai = True
    for k in range(p["kmax"] + 1):
        for n in range(1, p["nmax"] + 1):
            ok = el.shift_operator_check(n, k)
            plus_sign = el.shift_operator_check(n, k, sign=1)
            ai &= ok
            rows.append({"n": n, "k": k, "askey_ismail": ok, "plus_sign_operator": plus_sign})
    return Outcome(rows, [Check("P0", p0, 0, "eq"), Check("Pn0", pn0, 0, "eq"),
                          Check("P22", p22, 0, "eq"), Check("askey_ismail", ai, 0, "eq")])


def _resonance(p, tol, seed):
    from . import kz, sl2
    m = tuple(p["m"])
    kappa = float(sum(m))
    rows = []
    vals = {}
    for label, kap in (("resonant", kappa), ("off_resonant", kappa + p["offset"])):
        system = kz.KZSystem(sl2.VermaTensorSpace(m, 2), 1, kap)
        r = max(kz.resonance_membership(system, kz.interval_cycle(i), p["z"]) for i in range(2, len(m) + 1))
        vals[label] = r
        rows.append({"case": label, "kappa": kap, "residual": r})
    return Outcome(rows, [Check("resonant", vals["resonant"], tol["resonant"]),
                          Check("off_resonant", vals["off_resonant"], tol["off_resonant"], "ge")])


def _qkz_twist(p, tol, seed):
    from . import qkz
    rows, worst = [], 0.0
    for kind, kw in (("rational", {}), ("trigonometric", {"p": 1.7}), ("elliptic", {"a": 0.3, "tau": 1.2j})):
        r = qkz.TwistFunction(kind, **kw).inversion_residual(seed=seed)
        worst = max(worst, r)
        rows.append({"kind": kind, "inversion_residual": r})
    return Outcome(rows, [Check("h(x)h(-x)=1", worst, tol["inversion"])])


EXPERIMENTS = {e.name: e for e in [
    Experiment("selberg-grid", "Selberg integral", "numeric Selberg integrals against the Gamma product",
               _selberg_grid, {"k": [1, 2], "a": [0.5, 1.0, 1.7], "b": [0.5, 1.0, 1.7], "c": [0.0, 0.5, 1.0]},
               {"gap": 1e-6}, 1),
    Experiment("selberg-contiguous", "Selberg integral", "a -> a+1 ratio against the product formula",
               _selberg_contiguous, {"k": [1, 2], "a": 0.8, "b": 1.3, "c": 0.4}, {"gap": 1e-6}),
    Experiment("mehta-limit", "Gaussian limit", "Gaussian (Mehta) integral against its Gamma product",
               _mehta_limit, {"k": [1, 2], "a": 0.7, "c": [0.5, 1.0]}, {"gap": 1e-6}),
    Experiment("gauss-2f1", "Gauss hypergeometric function", "2F1 series against the Euler integral and Gauss value",
               _gauss_2f1, {"a": 0.3, "b": 0.7, "c": 1.9, "z": [-0.8, 0.2, 0.6]}, {"gap": 1e-10, "gauss": 1e-12}),
    Experiment("kz-interval", "hypergeometric solutions", "KZ residual and singular identity of interval integrals",
               _kz_interval, {"n": [2, 3], "m": [-1.3, -0.7, -2.1], "z": [0.0, 1.0, 2.7], "kappa": 3.0},
               {"kz_residual": 1e-6, "singular_identity": 1e-7}, 2),
    Experiment("euler-determinant", "determinant theorem", "Euler-type determinant against its Gamma product",
               _euler_determinant, {"z": [0.0, 1.0, 2.5], "alpha": [0.4, 0.7, 1.3]}, {"gap": 1e-7}, 3),
    Experiment("solution-determinant", "determinant of solutions", "log-derivative of the solution determinant",
               _solution_determinant, {"m": [-1.3, -0.7, -2.1], "z": [0.0, 1.0, 2.7], "kappa": 3.0}, {"gap": 1e-6}, 3),
    Experiment("bethe-counts", "counting and norm theorems", "orbit counts, Bethe eigen-residuals, norm = Hessian",
               _bethe_counts, {"cases": [[1, 2], [1, 3], [2, 2], [2, 3]], "m": [-1.3, -0.7, -2.1], "z": [0.0, 1.0, 2.5]},
               {"eigen": 1e-8, "norm": 1e-8}, 4),
    Experiment("bethe-two-point-norm", "two-point norm formula", "n = 2 Shapovalov norm and Hessian against the cube formula",
               _two_point_norm, {"m": [-1.3, -0.7], "k": [1, 2, 3]}, {"gap": 1e-8}, 4),
    Experiment("critical-classification", "positive integer weights", "critical-set classification for m = (1,1,1)",
               _classification, {"m": [1, 1, 1], "z": [0.0, 1.0, 2.5], "k": [1, 2, 5, 6], "expected": [2, 0, 0, 0],
                                 "nstarts": 200}, {}, 4),
    Experiment("heine-stieltjes", "Heine-Stieltjes correspondence", "polynomial from a critical point solves Fu''+Gu'+Hu = 0",
               _heine_stieltjes, {"k": 2, "m": [-1.3, -0.7, -2.1], "z": [0.0, 1.0, 2.5]}, {"remainder": 1e-8}, 5),
    Experiment("selberg-critical", "Selberg-integrand critical point", "symmetric functions of the critical point",
               _selberg_critical, {"k": 3, "alpha": 0.7, "beta": 1.2, "gamma": 0.4}, {"gap": 1e-10, "grad": 1e-8}),
    Experiment("yang-baxter", "R-matrix and braid group", "YBE, braid relations and PR intertwining",
               _yang_baxter, {"m": [1.3, 0.7, 2.2], "kappa": 3.7, "depth": 2},
               {"ybe": 1e-12, "braid": 1e-12, "intertwiner": 1e-12}, 6),
    Experiment("pr-values", "explicit PR values", "PR on L_m (x) L_l against the displayed and derived tables",
               _pr_values, {"pairs": [[1.3, 0.7], [2.0, 3.0], [0.4, 1.9]], "kappa": 3.7}, {"values": 1e-12}, 6),
    Experiment("quantum-sing-sign", "quantum singular vectors", "exponent sign fixed by pure-braid invariance",
               _quantum_sing_sign, {"m": [1.3, 0.7, 2.2], "kappa": 3.7}, {"invariance": 1e-10}),
    Experiment("kohno-drinfeld", "Kohno-Drinfeld theorem", "KZ monodromy eigenvalues against R^2 eigenvalues",
               _kohno_drinfeld, {"n": 0, "m": [-1.3, -0.7, -2.1], "z": [0.0, 1.0, 2.5], "kappa": 5.3, "nseg": 64},
               {"gap": 1e-4}, 7),
    Experiment("trig-dynamical", "dynamical equation", "compatibility of trigonometric KZ and K(z, lambda); P(lambda) product",
               _trig_dynamical, {"m": [1.3, 0.7], "z": [1.0, 2.1], "kappa": 2.3, "lam": 0.7, "kmax": 2},
               {"compat": 1e-10, "product": 1e-12}, 8),
    Experiment("trig-selberg-solution", "Selberg-based solution", "one-factor solution of both equations",
               _trig_selberg, {"m": 1.7, "k": [1, 2, 3], "kappa": 2.3, "lam": 0.7}, {"residual": 1e-8}, 8),
    Experiment("trig-flatness", "trigonometric KZ", "zero curvature of the trigonometric connection",
               _trig_flatness, {"m": [1.3, 0.7, 2.2], "z_re": [1.0, 2.1, -0.7], "z_im": [0.0, 0.3, 0.0], "kappa": 2.3, "lam": 0.7},
               {"curvature": 1e-6}),
    Experiment("qkz-flatness", "discrete flat connection", "K_i K_j flatness for spin 1/2, n = 3",
               _qkz_flatness, {"m": [0.5, 0.5, 0.5], "z": [0.3, 1.1, 2.6], "p": 1.7, "mu": 0.4}, {"flatness": 1e-10}, 9),
    Experiment("qkz-r-matrix", "R-matrix via F-space basis change", "spin-1/2 R from F-spaces against the 4x4 display",
               _qkz_r_matrix, {"x": [0.37, -1.9, 2.4], "m": [0.6, 1.1, 0.8], "points": [0.3, 1.4, -0.9]}, {"display": 1e-10, "qybe": 1e-10}, 9),
    Experiment("barnes", "Barnes formula", "Barnes integral against its Gamma product",
               _barnes, {"points": [[0.3, 0.5, 0.7, 0.9], [1.1, 0.4, 0.6, 0.2], [0.25, 0.25, 0.8, 1.3],
                                    [0.6, 1.7, 0.35, 0.45], [2.1, 0.9, 1.4, 0.3]]}, {"gap": 1e-7}, 9),
    Experiment("qkz-solution", "q-hypergeometric solutions", "k = 1 Mellin-Barnes solution of rational q-KZ, n = 2",
               _qkz_solution, {"z_re": [0.2, 0.1], "z_im": [0.3, -0.4], "m": [-0.6, -0.7], "p": -0.5}, {"residual": 1e-6}, 9),
    Experiment("qkz-determinant", "q-hypergeometric determinant", "two-point determinant against the Gamma formula",
               _qkz_determinant, {"z": [0.2, 1.0], "m": [-0.6, -0.7], "p": -1.3}, {"gap": 1e-8}),
    Experiment("qkz-classical-limit", "classical limit", "q-KZ operators tend to KZ as p -> infinity",
               _qkz_classical, {"m": [0.6, 1.1, 0.8], "p": 1.0, "Z": [0.3, 1.1, 2.6], "S": [1e2, 1e3, 1e4]},
               {"deviation": 1e-3}),
    Experiment("qkz-twist", "twisted symmetric group", "h(x)h(-x) = 1 for the three twist kinds",
               _qkz_twist, {}, {"inversion": 1e-12}),
    Experiment("theta-heat", "level-kappa theta functions", "heat equation for theta_{n,kappa}, kappa <= 6",
               _theta_heat, {"kappa_max": 6, "npts": 10}, {"heat": 1e-10}, 10),
    Experiment("theta-modular", "modular action", "S and T transformations of theta functions",
               _theta_modular, {"kappa_max": 4, "tau": [0.3, 1.1], "lam": [0.3, 0.1]}, {"modular": 1e-8}, 10),
    Experiment("kzb-theta-power", "theta^{p+1} solution", "theta^{p+1} solves KZB at kappa = 2p+2",
               _kzb_theta_power, {"p": [1, 2], "tau": [0.2, 1.1]}, {"kzb": 1e-7, "negative": 1e-2}, 10),
    Experiment("kzb-integral-p1", "p = 1 integral solution", "integral solution of KZB for p = 1",
               _kzb_integral, {"kappa": 6, "tau": [0.0, 2.0], "lam": 0.31, "mu": [0.2, 0.0]},
               {"kzb": 1e-5, "parity": 1e-10}),
    Experiment("conformal-blocks", "conformal blocks", "theta^{p+1} theta^S satisfies the four block conditions",
               _conformal_blocks, {"cases": [[1, 4], [1, 6], [2, 9]], "tau": [0.3, 1.1]}, {"conditions": 1e-10}),
    Experiment("lame-hermite", "Lame equation", "Hermite ansatz eigenfunction of d^2 - 2 wp",
               _lame, {"mu": 0.4, "tau": [0.0, 2.0]}, {"eigen": 1e-7, "wp": 1e-10}, 10),
    Experiment("macdonald", "Macdonald polynomials", "exact P_n^{(k)} and the Askey-Ismail shift identity",
               _macdonald, {"nmax": 4, "kmax": 2}, {}, 11),
    Experiment("resonance", "resonance theorem", "sum z_j m_j I_j = 0 at kappa = sum m_j",
               _resonance, {"m": [1.3, 0.7, 2.1], "z": [0.0, 1.0, 2.5], "offset": 0.7},
               {"resonant": 1e-7, "off_resonant": 1e-2}, 12),
]}

ACCEPTANCE_LIMITS = {1: 60, 2: 30, 3: 60, 4: 120, 5: 10, 6: 20, 7: 120, 8: 30, 9: 180, 10: 60, 11: 10, 12: 20}


def acceptance_experiments(criterion):
    return sorted(e.name for e in EXPERIMENTS.values() if e.criterion == criterion)


# ---------------------------------------------------------------------------
# configuration

_TOP_KEYS = {"experiment", "params", "tolerances", "seed", "out"}


def _read_config_file(path):
    path = Path(path)
    if not path.exists():
        raise UsageError(f"config file {path} not found")
    text = path.read_bytes()
    if path.suffix == ".toml":
        try:
            import tomllib
        except ImportError:
            import tomli as tomllib
        try:
            return tomllib.loads(text.decode())
        except tomllib.TOMLDecodeError as e:
            raise UsageError(f"invalid TOML: {e}")
    if path.suffix == ".json":
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise UsageError(f"invalid JSON: {e}")
    raise UsageError("config files must be .toml or .json")


def make_config(name, data=None, overrides=None):
    """Validated ExperimentConfig from a config mapping and --param overrides."""
    if name not in EXPERIMENTS:
        close = difflib.get_close_matches(name, EXPERIMENTS, n=3)
        hint = f" Did you mean: {', '.join(close)}?" if close else ""
        raise UsageError(f"unknown experiment {name!r}.{hint} Available: {', '.join(sorted(EXPERIMENTS))}")
    exp = EXPERIMENTS[name]
    data = dict(data or {})
    bad = set(data) - _TOP_KEYS
    if bad:
        raise UsageError(f"unknown config keys: {sorted(bad)}")
    if data.get("experiment", name) != name:
        raise UsageError(f"config is for {data['experiment']!r}, not {name!r}")
    params = dict(exp.params)
    for source in (data.get("params", {}), overrides or {}):
        bad = set(source) - set(exp.params)
        if bad:
            raise UsageError(f"unknown parameters for {name}: {sorted(bad)}")
        params.update(source)
    tols = dict(exp.tolerances)
    given = data.get("tolerances", {})
    bad = set(given) - set(exp.tolerances)
    if bad:
        raise UsageError(f"unknown tolerances for {name}: {sorted(bad)}")
    for k, v in given.items():
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
            raise UsageError(f"tolerance {k} must be a positive number")
        tols[k] = float(v)
    seed = data.get("seed", DEFAULT_SEED)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise UsageError("seed must be an integer")
    return ExperimentConfig(name, params, tols, seed, data.get("out"))


def _parse_overrides(extra):
    out, i = {}, 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--"):
            raise UsageError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, val = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extra):
                raise UsageError(f"missing value for {tok}")
            val = extra[i + 1]
            i += 2
        try:
            out[key.replace("-", "_")] = json.loads(val)
        except json.JSONDecodeError:
            out[key.replace("-", "_")] = val
    return out


# ---------------------------------------------------------------------------
# running and output

def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (complex, np.complexfloating)):
        return repr(complex(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, rows):
    """RFC-4180 CSV (CRLF line ends, minimal quoting) with a fixed column order."""
    cols = []
    for r in rows:
        for c in r:
            if c not in cols:
                cols.append(c)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\r\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_cell(r.get(c, "")) for c in cols])


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def run(config, tol_scale=1.0):
    """Execute one experiment; returns the report record."""
    exp = EXPERIMENTS[config.name]
    tols = dict(config.tolerances)
    np.random.seed(config.seed % 2 ** 32)
    t0 = time.perf_counter()
    try:
        outcome = exp.func(config.params, tols, config.seed)
        error = None
    except Exception as e:  # report failures as check failures, not crashes
        outcome, error = Outcome([], []), f"{type(e).__name__}: {e}"
    elapsed = time.perf_counter() - t0
    checks = [Check(c.name, c.value, _scaled(c.tol, c.kind, tol_scale), c.kind) for c in outcome.checks]
    passed = error is None and all(c.passed for c in checks)
    report = {"experiment": exp.name, "tag": exp.tag, "criterion": exp.criterion, "seed": config.seed,
              "params": config.params, "tolerances": tols, "tol_scale": tol_scale,
              "checks": [c.to_record() for c in checks], "passed": passed, "error": error,
              "elapsed_s": elapsed}
    if config.out:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / f"{exp.name}.csv", outcome.rows)
        if outcome.plot:
            write_csv(out / f"{exp.name}.plot.csv", outcome.plot)
        with open(out / f"{exp.name}.json", "w") as f:
            json.dump(report, f, indent=2, sort_keys=True, default=_json_default)
        report["csv"] = str(out / f"{exp.name}.csv")
    report["rows"] = outcome.rows
    return report


def _run_named(args):
    name, tol_scale, out = args
    cfg = make_config(name)
    cfg.out = out
    rep = run(cfg, tol_scale)
    rep.pop("rows", None)
    return rep


def _workers():
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{WORKERS_ENV} must be an integer, got {raw!r}")
    if n < 1:
        raise UsageError(f"{WORKERS_ENV} must be positive")
    return n


def verify_all(tol_scale=1.0, out=None, workers=None):
    """Run every acceptance experiment; returns (per-criterion summary, reports)."""
    if not tol_scale > 0:
        raise UsageError("--tol-scale must be positive")
    names = sorted(e.name for e in EXPERIMENTS.values() if e.criterion is not None)
    jobs = [(n, tol_scale, out) for n in names]
    workers = workers or _workers()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_run_named, jobs))
    else:
        reports = [_run_named(j) for j in jobs]
    reports.sort(key=lambda r: (r["criterion"], r["experiment"]))
    summary = []
    for c in sorted(ACCEPTANCE_LIMITS):
        reps = [r for r in reports if r["criterion"] == c]
        elapsed = sum(r["elapsed_s"] for r in reps)
        ok = all(r["passed"] for r in reps) and elapsed <= ACCEPTANCE_LIMITS[c]
        failing = [f"{r['experiment']}:{ch['check']}" for r in reps for ch in r["checks"] if not ch["passed"]]
        failing += [f"{r['experiment']}:{r['error']}" for r in reps if r["error"]]
        summary.append({"criterion": c, "passed": ok, "elapsed_s": elapsed,
                        "limit_s": ACCEPTANCE_LIMITS[c], "experiments": [r["experiment"] for r in reps],
                        "failing": failing})
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        write_csv(Path(out) / "verify-all.csv",
                  [{"criterion": s["criterion"], "passed": s["passed"], "experiments": " ".join(s["experiments"]),
                    "failing": " ".join(s["failing"])} for s in summary])
        with open(Path(out) / "verify-all.json", "w") as f:
            json.dump({"summary": summary, "reports": reports}, f, indent=2, sort_keys=True, default=_json_default)
    return summary, reports


# ---------------------------------------------------------------------------
# entry point

def _build_parser():
    ap = argparse.ArgumentParser(prog="kzlab", description="Run KZ-equation checks and experiments.")
    sub = ap.add_subparsers(dest="cmd", required=True)
    sub.add_parser("list", help="list experiments")
    r = sub.add_parser("run", help="run one experiment")
    r.add_argument("name")
    r.add_argument("--config")
    r.add_argument("--out")
    v = sub.add_parser("verify-all", help="run the acceptance suite")
    v.add_argument("--tol-scale", type=float, default=1.0)
    v.add_argument("--out")
    return ap


def _print_summary(summary):
    for s in summary:
        status = "PASS" if s["passed"] else "FAIL"
        extra = f"  failing: {', '.join(s['failing'])}" if s["failing"] else ""
        print(f"criterion {s['criterion']:2d}: {status}  ({s['elapsed_s']:.1f}s / {s['limit_s']}s){extra}")


def main(argv=None):
    ap = _build_parser()
    try:
        args, extra = ap.parse_known_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if args.cmd == "list":
            if extra:
                raise UsageError(f"unexpected arguments {extra}")
            for name in sorted(EXPERIMENTS):
                e = EXPERIMENTS[name]
                crit = f"[criterion {e.criterion}]" if e.criterion else ""
                print(f"{name:24s} {e.tag:48s} {crit}")
            return 0
        if args.cmd == "verify-all" or (args.cmd == "run" and args.name == "verify-all"):
            if extra:
                raise UsageError(f"unexpected arguments {extra}")
            scale = getattr(args, "tol_scale", 1.0)
            summary, _ = verify_all(scale, args.out)
            _print_summary(summary)
            return 0 if all(s["passed"] for s in summary) else 1
        data = _read_config_file(args.config) if args.config else {}
        cfg = make_config(args.name, data, _parse_overrides(extra))
        if args.out:
            cfg.out = args.out
        rep = run(cfg)
        for ch in rep["checks"]:
            print(f"{ch['check']:28s} {'PASS' if ch['passed'] else 'FAIL'}  value={ch['value']}  tol={ch['tol']}")
        if rep["error"]:
            print(f"error: {rep['error']}")
        print(f"{rep['experiment']}: {'PASS' if rep['passed'] else 'FAIL'} ({rep['elapsed_s']:.2f}s)")
        return 0 if rep["passed"] else 1
    except UsageError as e:
        print(f"kzlab: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
