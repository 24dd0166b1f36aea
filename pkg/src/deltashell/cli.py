"""Command line front end.

Subcommands: ``symbols``, ``constants``, ``modes``, ``fit``, ``verify`` and
``oracle``. Exit codes: 0 success, 1 a requested check failed, 2 invalid
configuration, 3 admissibility or ellipticity failure, 4 numerical failure.
Errors print a one-line JSON object to standard error.
"""

import argparse
import io
import json
import math
import sys

import numpy as np

from . import bessel, fd_oracle, modes, symbols
from .asymptotics import check_remainder_order, default_window, fit_constant
from .config import read_config
from .errors import (AdmissibilityError, BesselRangeError, ConfigError, EllipticityError,
                     QuadratureError)
from .geometry import frame_at, transform_to_frame
from .kinds import Kind
from .seeley import BIG_O_ONE_BETTER, laplacian_closed_form, predict
from .strengths import constant_value

EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_ADMISSIBILITY = 3
EXIT_NUMERICAL = 4

DEFAULT_FORMATS = {"symbols": "csv", "constants": "json", "modes": "csv", "fit": "json",
                   "verify": "json", "oracle": "csv"}


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


class Report:
    """Collects rows or a JSON document and writes them with the resolved config."""

    def __init__(self, cfg, fmt):
        self.cfg = cfg
        self.fmt = fmt

    def render_csv(self, header, rows):
        out = io.StringIO()
        for line in self.cfg.as_lines():
            out.write(f"# {line}\n")
        out.write(",".join(header) + "\n")
        for row in rows:
            out.write(",".join(_fmt(v) if not isinstance(v, str) else v for v in row) + "\n")
        return out.getvalue()

    def render_json(self, doc):
        doc = dict(doc)
        doc["config"] = self.cfg.resolved
        return json.dumps(doc, indent=2, default=_json_default) + "\n"

    def render_table(self, header, rows):
        if self.fmt == "json":
            return self.render_json({"columns": list(header),
                                     "rows": [list(r) for r in rows]})
        return self.render_csv(header, rows)

    def render_doc(self, doc):
        if self.fmt == "csv":
            flat = [(k, v) for k, v in _flatten(doc)]
            return self.render_csv(["key", "value"], [(k, json.dumps(v, default=_json_default))
                                                      for k, v in flat])
        return self.render_json(doc)


def _flatten(doc, prefix=""):
    for key, value in doc.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            yield from _flatten(value, name + ".")
        else:
            yield name, value


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not serializable: {type(obj).__name__}")


def _require_mode_solver(cfg):
    if cfg.geometry.shape == "ellipse":
        raise ConfigError("the mode solver needs shape circle or sphere")
    if cfg.coefficients.family != "identity":
        raise ConfigError("the mode solver needs identity coefficients")


def _spectrum(cfg, threads):
    _require_mode_solver(cfg)
    inter = cfg.interaction
    surface = cfg.surface()
    m0 = cfg.coefficients.m0
    cutoff = cfg.solver.mode_cutoff
    if inter.kind.uses_alpha and not inter.alpha_is_constant:
        if surface.shape != "circle":
            raise ConfigError("variable alpha is supported on the circle only")
        return modes.fourier_galerkin_singular_values(inter.alpha, surface, m0, cutoff,
                                                      cfg.solver.guard_band)
    alpha = constant_value(inter.alpha_strength) if inter.kind.uses_alpha else None
    return modes.krein_singular_values(inter.kind, surface, m0, cutoff, alpha=alpha,
                                       beta=inter.beta, threads=threads)


def _law(cfg):
    kind = cfg.interaction.kind
    if kind is Kind.NEUMANN_VS_FREE:
        return None
    return predict(kind, cfg.surface(), cfg.coefficient_field(), cfg.interaction.strength,
                   rtol=cfg.solver.quadrature_tol)


def cmd_symbols(cfg, threads, report):
    surface = cfg.surface()
    coeffs = cfg.coefficient_field()
    kind = cfg.interaction.kind
    strength = cfg.interaction.strength
    if surface.n == 2:
        params = np.arange(16) * (2 * math.pi / 16)
        dirs = np.array([[1.0], [-1.0]])
    else:
        phi = (np.arange(8) + 0.5) * (math.pi / 8)
        theta = np.arange(8) * (2 * math.pi / 8)
        P, T = np.meshgrid(phi, theta, indexing="ij")
        params = np.stack([P.ravel(), T.ravel()], axis=-1)
        w = np.arange(4) * (math.pi / 4)
        dirs = np.stack([np.cos(w), np.sin(w)], axis=-1)
    frame = frame_at(surface, params)
    local = transform_to_frame(coeffs, frame)
    xi = np.broadcast_to(dirs, frame.point.shape[:-1] + dirs.shape)
    sym = symbols.kappa(local, xi)
    p_gn, p_ng = symbols.dtn_ntd_principal(sym)
    r_g, r_n = symbols.composition_principal(sym)
    op = None
    if kind is not Kind.NEUMANN_VS_FREE:
        s = None if strength is None else np.asarray(
            strength(frame.point) if callable(strength) else np.full(frame.point.shape[:-1],
                                                                     strength))[..., None]
        op = symbols.operator_principal_symbol(kind, sym, s)
    header = (["t"] if surface.n == 2 else ["phi", "theta"]) + \
        [f"xi{i + 1}" for i in range(surface.n - 1)] + \
        ["a_nn", "b", "c", "kappa0", "kappa_plus_re", "kappa_plus_im", "p_gamma_nu",
         "p_nu_gamma", "r_gamma_sym", "r_nu_sym", "operator_symbol"]
    rows = []
    for i in range(params.shape[0]):
        for q in range(dirs.shape[0]):
            pt = [params[i]] if surface.n == 2 else list(params[i])
            rows.append(pt + list(dirs[q]) + [
                sym.a_nn[i, q], sym.b[i, q], sym.c[i, q], sym.kappa0[i, q],
                sym.kappa_plus[i, q].real, sym.kappa_plus[i, q].imag, p_gn[i, q], p_ng[i, q],
                r_g[i, q], r_n[i, q], float("nan") if op is None else op[i, q]])
    return report.render_table(header, rows), 0


def cmd_constants(cfg, threads, report):
    law = _law(cfg)
    if law is None:
        raise ConfigError("no symbol-based constant for neumann_vs_free")
    doc = law.as_dict()
    doc["closed_form"] = None
    value = constant_value(cfg.interaction.strength) if cfg.interaction.strength is not None \
        else None
    if cfg.coefficients.family == "identity" and cfg.geometry.shape != "ellipse" and (
            value is not None or cfg.interaction.kind is Kind.DELTAPRIME_VS_FREE):
        cp, c = laplacian_closed_form(cfg.interaction.kind, cfg.surface(), value)
        doc["closed_form"] = {"C_prime": cp, "C": c}
    return report.render_doc(doc), 0


def cmd_modes(cfg, threads, report):
    spectrum = _spectrum(cfg, threads)
    p = cfg.interaction.kind.exponent(cfg.geometry.n)
    s = spectrum.flat
    j = np.arange(1, s.size + 1)
    rows = zip(j, s, spectrum.flat_modes, spectrum.flat_mult, j.astype(float) ** p * s)
    return report.render_table(["j", "s", "mode", "mult", "jp_s"], rows), 0


def _tolerance(cfg, law):
    if cfg.geometry.n == 3:
        return 0.02
    if not cfg.interaction.alpha_is_constant and cfg.interaction.kind.uses_alpha:
        return 0.02 if law.remainder_class == BIG_O_ONE_BETTER else 0.05
    return 0.01


def cmd_fit(cfg, threads, report):
    spectrum = _spectrum(cfg, threads)
    law = _law(cfg)
    n = cfg.geometry.n
    p = cfg.interaction.kind.exponent(n)
    window = default_window(len(spectrum), n)
    if law is None:
        rep = fit_constant(spectrum, p, window)
        doc = rep.as_dict()
        doc["law"] = None
        return report.render_doc(doc), 0
    tol = _tolerance(cfg, law)
    rep = fit_constant(spectrum, p, window, c_ref=law.constant, rel_tol=tol)
    verdict = dict(rep.verdict)
    if law.remainder_class == BIG_O_ONE_BETTER and law.constant > 0:
        verdict["remainder"] = check_remainder_order(rep, -1.0 / (n - 1))
    doc = rep.as_dict()
    doc["verdict"] = verdict
    doc["law"] = law.as_dict()
    ok = all(verdict.values())
    return report.render_doc(doc), 0 if ok else EXIT_CHECK_FAILED


def _verify_symbols(cfg):
    rng = np.random.default_rng(7)
    surface = cfg.surface()
    frame = frame_at(surface, surface.sample_parameters(4))
    local = transform_to_frame(cfg.coefficient_field(), frame)
    m = frame.point.shape[0]
    xi = rng.standard_normal((m, 100, surface.n - 1))
    xi_n = rng.standard_normal((m, 100))
    sym = symbols.kappa(local, xi)
    a0 = symbols.principal_symbol(sym, xi_n)
    fact = symbols.factorized_symbol(sym, xi_n)
    res = [float(np.max(np.abs(a0 - fact) / np.abs(a0)))]
    res.append(float(np.max(np.abs(sym.kappa_minus - np.conj(sym.kappa_plus)))))
    res.append(float(np.max(np.abs(sym.kappa_plus.real - sym.kappa0 / sym.a_nn)
                            / (sym.kappa0 / sym.a_nn))))
    res.append(float(np.max(np.abs(np.abs(sym.kappa_plus) ** 2 - sym.c / sym.a_nn)
                            / (sym.c / sym.a_nn))))
    p, q = symbols.dtn_ntd_principal(sym)
    res.append(float(np.max(np.abs(p * q - 1))))
    return max(res), 1e-10


def _verify_bessel(cfg):
    worst = 0.0
    for x in (0.1, 0.5, 1.0, 3.0, 10.0, 50.0):
        logs_i, ri = bessel.log_i_sequence(101, x)
        logs_k, rk = bessel.log_k_sequence(101, x)
        for k in range(101):
            # x (I K' - I' K) = -1 evaluated from log values and ratios
            d_i = ri[k + 1] + k / x
            d_k = -1.0 / rk[k] - k / x
            w = x * math.exp(logs_i[k] + logs_k[k]) * (d_k - d_i)
            worst = max(worst, abs(w + 1.0))
        logs_i, ri = bessel.log_i_sequence(101, x, spherical=True)
        logs_k, rk = bessel.log_k_sequence(101, x, spherical=True)
        for l in range(101):
            d_i = ri[l + 1] + l / x
            d_k = -1.0 / rk[l] - (l + 1) / x
            w = x * x * math.exp(logs_i[l] + logs_k[l]) * (d_k - d_i)
            worst = max(worst, abs(w / (-0.5 * math.pi) - 1.0))
    return worst, 1e-10


def _verify_krein(cfg):
    if cfg.geometry.shape == "ellipse":
        return None, 1e-12
    surface = cfg.surface()
    inter = cfg.interaction
    alpha = constant_value(inter.alpha_strength) if inter.alpha is not None else 1.0
    beta = inter.beta if inter.beta else 1.0
    if alpha is None:
        alpha = 1.0
    worst = 0.0
    for k in range(min(cfg.solver.mode_cutoff, 50) + 1):
        worst = max(worst, modes.verify_phi_psi_inverse(k, alpha, beta, surface,
                                                        cfg.coefficients.m0))
    return worst, 1e-12


def _verify_adjoint(cfg):
    n = cfg.geometry.n
    m0 = cfg.coefficients.m0
    R = 1.0
    worst_order = math.inf
    worst_neumann = 0.0
    for side in "-+":
        res = [fd_oracle.verify_adjoint_identity(fd_oracle.RadialMesh.build(n, R, h, 1, m0),
                                                 m0, side, "dirichlet") for h in (2e-3, 1e-3)]
        worst_order = min(worst_order, float(fd_oracle.observed_orders(res)[0]))
        worst_neumann = max(worst_neumann, fd_oracle.verify_adjoint_identity(
            fd_oracle.RadialMesh.build(n, R, 1e-3, 1, m0), m0, side, "neumann"))
    return {"dirichlet_order": worst_order, "neumann_residual": worst_neumann}, \
        {"dirichlet_order": 1.8, "neumann_residual": 1e-12}


def cmd_verify(cfg, threads, report):
    groups = {}
    for name, fn in (("symbols", _verify_symbols), ("bessel", _verify_bessel),
                     ("krein", _verify_krein)):
        value, tol = fn(cfg)
        if value is None:
            groups[name] = {"passed": True, "skipped": True}
        else:
            groups[name] = {"passed": bool(value <= tol), "max_residual": value,
                            "tolerance": tol}
    value, tol = _verify_adjoint(cfg)
    groups["adjoint"] = {"passed": bool(value["dirichlet_order"] >= tol["dirichlet_order"]
                                        and value["neumann_residual"] <= tol["neumann_residual"]),
                         **value}
    ok = all(g["passed"] for g in groups.values())
    return report.render_doc({"passed": ok, "groups": groups}), 0 if ok else EXIT_CHECK_FAILED


def cmd_oracle(cfg, threads, report):
    _require_mode_solver(cfg)
    surface = cfg.surface()
    m0 = cfg.coefficients.m0
    inter = cfg.interaction
    alpha = constant_value(inter.alpha_strength) if inter.kind.uses_alpha else None
    if inter.kind.uses_alpha and alpha is None:
        raise ConfigError("the oracle needs a constant alpha")
    top = min(10, cfg.solver.mode_cutoff)
    table = modes.mode_table(surface, m0, top)
    modes.check_admissibility(inter.kind, table, alpha, inter.beta, surface)
    exact_s = modes.krein_mode_values(inter.kind, table, alpha, inter.beta)
    hs = (2e-3, 1e-3, 5e-4)
    rows = []
    worst = math.inf
    for k in range(top + 1):
        series = {"p_minus": [], "p_plus": [], inter.kind.value: []}
        for h in hs:
            mesh = fd_oracle.RadialMesh.build(surface.n, surface.R, h, k, m0)
            pm, pp = fd_oracle.fd_dtn(mesh, m0)
            sv = fd_oracle.fd_resolvent_difference(inter.kind, mesh, m0, alpha, inter.beta)
            series["p_minus"].append(pm)
            series["p_plus"].append(pp)
            series[inter.kind.value].append(sv)
        ref = {"p_minus": table.p_minus[k], "p_plus": table.p_plus[k],
               inter.kind.value: exact_s[k]}
        for name, vals in series.items():
            err = [abs(v - ref[name]) for v in vals]
            orders = [float("nan")] + list(fd_oracle.observed_orders(err))
            worst = min(worst, min(orders[1:]))
            for h, v, e, o in zip(hs, vals, err, orders):
                rows.append((name, k, h, v, ref[name], e, o))
    text = report.render_table(["quantity", "mode", "h", "value", "reference", "error",
                                "order"], rows)
    return text, 0 if worst >= 1.8 else EXIT_CHECK_FAILED


COMMANDS = {"symbols": cmd_symbols, "constants": cmd_constants, "modes": cmd_modes,
            "fit": cmd_fit, "verify": cmd_verify, "oracle": cmd_oracle}


def build_parser():
    parser = argparse.ArgumentParser(prog="deltashell", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH")
        p.add_argument("--set", metavar="SECTION.KEY=VALUE", action="append", default=[],
                       dest="overrides")
        p.add_argument("--out", metavar="PATH")
        p.add_argument("--threads", type=int, default=1)
    return parser


def _fail(code, category, reason):
    sys.stderr.write(json.dumps({"error": category, "reason": reason}) + "\n")
    return code


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else 0
    try:
        overrides = list(args.overrides)
        if args.out:
            overrides.append(f"output.path={args.out}")
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        cfg = read_config(args.config, overrides)
        fmt = cfg.output.format or DEFAULT_FORMATS[args.command]
        text, code = COMMANDS[args.command](cfg, args.threads, Report(cfg, fmt))
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))
    except (AdmissibilityError, EllipticityError) as exc:
        return _fail(EXIT_ADMISSIBILITY, "admissibility", str(exc))
    except (QuadratureError, BesselRangeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return _fail(EXIT_NUMERICAL, "numerical", str(exc))
    except ValueError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))
    if cfg.output.path:
        with open(cfg.output.path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
