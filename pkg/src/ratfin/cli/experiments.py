"""One function per experiment id.  Each only wires config values into library
calls and shapes the results into tables; no numerics live here."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np

from ratfin import equity_premium as ep
from ratfin import excess_volatility as ev
from ratfin import hjm
from ratfin import nig
from ratfin import option_pricer as op
from ratfin import stratonovich as st
from ratfin.errors import ConfigError, MomentNonexistenceError
from ratfin.laws import LogNormal
from ratfin.cli.config import ExperimentConfig


@dataclass
class Table:
    name: str
    columns: List[str]
    rows: List[dict] = field(default_factory=list)
    single: bool = False  # JSON: emit the one row as an object


def nig_table(cfg: ExperimentConfig) -> List[Table]:
    p = cfg.params
    xs = np.linspace(p["x_min"], p["x_max"], p["points"])
    pdf = Table("pdf", ["mu", "alpha", "beta", "delta", "x", "pdf"])
    moments = Table("moments", ["mu", "alpha", "beta", "delta", "mean", "variance",
                                "skewness", "excess_kurtosis"])
    for alpha in p["alpha"]:
        for ratio in p["beta_ratio"]:
            params = nig.NigParams(p["mu"], alpha, ratio * alpha, p["delta"])
            head = {"mu": params.mu, "alpha": params.alpha, "beta": params.beta, "delta": params.delta}
            for x, f in zip(xs, nig.nig_pdf(params, xs)):
                pdf.rows.append({**head, "x": float(x), "pdf": float(f)})
            m = nig.nig_moments(params)
            moments.rows.append({**head, "mean": m.mean, "variance": m.variance,
                                 "skewness": m.skewness, "excess_kurtosis": m.excess_kurtosis})
    return [pdf, moments]


def alpha_integral(cfg: ExperimentConfig) -> List[Table]:
    p = cfg.params
    grid = st.PathGrid(p["horizon"], p["steps"])
    paths = st.brownian_paths(grid, p["paths"], cfg.seed)
    out = Table("integral", ["alpha", "mean", "se", "target", "z"])
    for a in p["alphas"]:
        vals = st.alpha_integral(lambda t, b: b, paths, a)
        mean = float(vals.mean())
        se = float(vals.std(ddof=1) / math.sqrt(vals.size))
        target = a * grid.horizon
        out.rows.append({"alpha": a, "mean": mean, "se": se, "target": target,
                         "z": (mean - target) / se})
    return [out]


def sde_convention(cfg: ExperimentConfig) -> List[Table]:
    p = cfg.params
    spec = st.geometric_spec(p["m"], p["s"], p["alpha"], p["x0"])
    grid = st.PathGrid(p["horizon"], p["steps"])
    rep = st.convention_discrepancy_report(spec, grid, p["paths"], cfg.seed)
    report = Table("report", ["scheme", "alpha", "mean", "se", "z_vs_alpha_point", "matches"],
                   rep.rows())
    tables = [report]
    if p["export_paths"]:
        ens = st.simulate_alpha_point_euler(spec, grid, p["paths"], cfg.seed)
        tables.append(Table("paths", ["path", "terminal", "diverged"], [
            {"path": i, "terminal": float(v), "diverged": int(d)}
            for i, (v, d) in enumerate(zip(ens.terminal, ens.diverged))
        ]))
    return tables


def pde_price(cfg: ExperimentConfig) -> List[Table]:
    p = cfg.params
    problem = op.constant_problem(p["spot"], p["strike"], p["maturity"], p["vol"], p["rate"],
                                  p["alpha_market"], p["gamma_trader"], p["kind"])
    grid = op.default_grid(problem, p["n_x"], p["n_t"], p["theta"])
    surface = op.solve_pde(problem, grid)
    q = float(op.dividend_yield(problem, 0.0, p["spot"]))
    row = {
        "price": surface.price_at(p["spot"]),
        "closed_form": op.bs_closed_form(p["spot"], p["strike"], p["rate"], q, p["vol"],
                                         p["maturity"], p["kind"]),
        "dividend_yield": q,
        "n_x": p["n_x"],
        "n_t": p["n_t"],
        "mc_price": "",
        "mc_se": "",
    }
    if p["mc_paths"] > 0:
        mc = op.mc_price_predictable(problem, st.PathGrid(p["maturity"], p["mc_steps"]),
                                     p["mc_paths"], cfg.seed)
        row["mc_price"], row["mc_se"] = mc.price, mc.se
    tables = [Table("price", list(row), [row], single=True)]
    if p["export_surface"]:
        tables.append(Table("surface", ["t", "x", "C"], list(surface.rows())))
    return tables


def hjm_check(cfg: ExperimentConfig) -> List[Table]:
    p = cfg.params
    if p["model"] == "ho-lee":
        model = hjm.ho_lee_model(p["v0"], p["theta0"], p["alpha"], p["rate"], p["horizon"],
                                 p["maturity_points"])
    else:
        m0 = p["m0"]
        model = hjm.flat_model(p["rate"], p["v0"], p["horizon"], p["maturity_points"], p["alpha"],
                               lambda t, T: m0 + 0.0 * np.asarray(T, dtype=float))
    mats = model.maturities
    check = hjm.check_no_arbitrage(model, mats[:-1], mats, p["tol"])
    row = {"model": p["model"], "arbitrage_free": int(check.arbitrage_free), "spread": check.spread,
           "bond_maturity": p["bond_maturity"], "bond_initial": hjm.bond_price_initial(model, p["bond_maturity"]),
           "bond_mc": "", "bond_se": "", "z": ""}
    if p["paths"] > 0:
        est = hjm.bond_price_mc(model, p["bond_maturity"], p["steps"], p["paths"], cfg.seed)
        row["bond_mc"], row["bond_se"] = est.price, est.se
        row["z"] = (est.price - row["bond_initial"]) / est.se if est.se > 0 else 0.0
    return [Table("check", list(row), [row], single=True)]


def premium_table(cfg: ExperimentConfig) -> List[Table]:
    p = cfg.params
    ln_law = LogNormal(p["mu"], p["sigma2"])
    nig_law = nig.NigParams(p["mu"], p["nig_alpha"], p["nig_beta"], p["nig_delta"])
    out = Table("premium", ["a", "lognormal_premium", "lognormal_riskfree", "nig_premium",
                            "nig_riskfree", "nig_feasible"])
    for a in p["a"]:
        ln_econ = ep.EconomyParams(p["b"], a, ln_law)
        nig_econ = ep.EconomyParams(p["b"], a, nig_law)
        row = {"a": a, "lognormal_premium": ep.mp_premium_lognormal(ln_econ),
               "lognormal_riskfree": ep.lognormal_riskfree(ln_econ)}
        try:
            row.update(nig_premium=ep.nig_premium(nig_econ), nig_riskfree=ep.nig_riskfree(nig_econ),
                       nig_feasible=1)
        except MomentNonexistenceError:
            row.update(nig_premium="", nig_riskfree="", nig_feasible=0)
        out.rows.append(row)
    return [out]


def ratio_surface(cfg: ExperimentConfig) -> List[Table]:
    p = cfg.params
    surf = ep.ratio_surface((p["a_min"], p["a_max"]), (p["alpha_min"], p["alpha_max"]),
                            (p["n_a"], p["n_alpha"]))
    return [Table("surface", ["a", "alpha", "R", "feasible"], list(surf.rows()))]


def _two_state_default() -> ev.StateProcess:
    return ev.StateProcess(
        (0.5, 0.5),
        (LogNormal(0.0, 0.04), LogNormal(0.0, 0.02)),
        (LogNormal(0.0, 0.01), LogNormal(0.0, 0.01)),
        ("high_vol", "low_vol"),
    )


def volatility_verdict(cfg: ExperimentConfig) -> List[Table]:
    p = cfg.params
    process = ev.read_state_process_csv(p["process"]) if p["process"] else _two_state_default()
    verdict = ev.efficiency_verdict(process, tol=p["tol"],
                                    correction=ev.MomentCorrection(p["correction"]))
    row = verdict.to_dict()
    row["states"] = len(process)
    if row["correction"] is None:
        row["correction"] = ""
    return [Table("verdict", ["verdict", "measure", "tol", "family", "correction", "states"],
                  [row], single=True)]


def calibrate(cfg: ExperimentConfig) -> List[Table]:
    p = cfg.params
    if not p["input"]:
        raise ConfigError("calibrate needs an input CSV (key 'input')", "calibrate.input")
    series = ep.read_growth_csv(p["input"])
    rep = ep.calibrate_growth(series, p["a"], p["b"])
    fit = {"n": rep.n, "lognormal_mu": rep.lognormal.mu, "lognormal_sigma2": rep.lognormal.sigma2}
    if rep.nig is not None:
        fit.update(nig_mu=rep.nig.mu, nig_alpha=rep.nig.alpha, nig_beta=rep.nig.beta,
                   nig_delta=rep.nig.delta, warning="")
    else:
        fit.update(nig_mu="", nig_alpha="", nig_beta="", nig_delta="", warning="; ".join(rep.warnings))
    return [
        Table("premia", ["a", "lognormal_premium", "nig_premium", "nig_feasible"], rep.rows),
        Table("fit", list(fit), [fit], single=True),
    ]


RUNNERS: Dict[str, Callable[[ExperimentConfig], List[Table]]] = {
    "nig-table": nig_table,
    "alpha-integral": alpha_integral,
    "sde-convention": sde_convention,
    "pde-price": pde_price,
    "hjm-check": hjm_check,
    "premium-table": premium_table,
    "ratio-surface": ratio_surface,
    "volatility-verdict": volatility_verdict,
    "calibrate": calibrate,
}
