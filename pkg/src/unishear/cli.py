"""
Command-line interface.

    unishear COMMAND [--config FILE] [--KEY VALUE ...] [--input PATH] [--mask PATH] [--reference PATH]

Configuration is a flat ``key=value`` file (``#`` starts a comment); every
key may also be given as a flag, which takes precedence.  Unknown keys are
errors.  Outputs go to ``outdir`` (config key), else ``$UNISHEAR_OUTDIR``,
else the working directory.

Exit codes: 0 success, 2 configuration error, 3 solver non-convergence
(outputs are still written), 4 I/O error, 5 tiling failure.
"""

import argparse
import os
import sys
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import io as uio
from .diagnostics import build_cluster, cluster_coherence, delta_sparsity, verify_error_bound, write_diagnostics_csv
from .harness import (
    ComparisonTable,
    SweepConfig,
    compare_presets,
    fit_decay_rate,
    plot_errors,
    run_sweep,
    write_records,
    write_reports,
    DegenerateInput,
)
from .model import EmptyMask, WeightSpec, filtered_model, make_mask, project_known
from .recover import SolverConfig, beta_quantile, inpaint_l1, inpaint_threshold_onestep, relative_error
from .system import band_count, band_listing, preset_from_name
from .transform import (
    TilingFailure,
    analyze,
    build_digital_system,
    default_J,
    l1_analysis_norm,
    lattice_transform,
    synthesize,
    tiling_residual,
    CoefficientSet,
)

ENV_OUTDIR = "UNISHEAR_OUTDIR"

EXIT_OK, EXIT_CONFIG, EXIT_NONCONV, EXIT_IO, EXIT_TILING = 0, 2, 3, 4, 5

COMMANDS = ("describe", "model", "mask", "analyze", "synthesize", "inpaint", "threshold", "diagnose", "sweep", "compare")


def _bool(v):
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


# key -> (parser, default, help)
KEYS = {
    "N": (int, None, "grid size (power of 2)"),
    "J": (int, None, "number of scales"),
    "eta": (Fraction, None, "pixels per unit length"),
    "preset": (str, "parabolic", "parabolic | wavelet | alpha=<x> | explicit list 0,1,..."),
    "presets": (str, "alpha=1/2;parabolic;wavelet", "semicolon separated presets for compare"),
    "rho": (float, None, "weight half-length (default T/4)"),
    "profile": (str, "bump", "weight profile: bump | cos2"),
    "amplitude": (float, 1.0, "weight amplitude"),
    "j": (int, None, "model scale"),
    "h": (float, None, "mask half-width, continuum units"),
    "h_pixels": (float, None, "mask half-width in pixels"),
    "solver": (str, "shrinkage_path", "shrinkage_path | splitting"),
    "max_iters": (int, 300, "iteration budget"),
    "lambda_max": (float, None, "initial threshold"),
    "lambda_min": (float, None, "final threshold"),
    "decay": (float, 0.9, "threshold decay factor"),
    "penalty": (float, None, "initial splitting penalty"),
    "tol": (float, 1e-6, "relative iterate-change tolerance"),
    "dual_tol": (float, 1e-7, "splitting absolute tolerance"),
    "beta": (float, None, "one-step threshold"),
    "beta_quantile": (float, None, "one-step threshold as a coefficient quantile"),
    "cone": (str, None, "restrict one-step thresholding to a cone (v)"),
    "epsilon": (float, 0.1, "cluster tube exponent"),
    "eps_prime": (float, 0.2, "gap law exponent offset"),
    "c": (float, None, "gap law constant"),
    "h1_pixels": (float, 8.0, "gap at j=1 in pixels when c is not given"),
    "j_min": (int, 1, "first swept scale"),
    "j_max": (int, 4, "last swept scale"),
    "diagnostics": (_bool, True, "compute delta_j and mu_c in sweeps"),
    "outdir": (str, None, "output directory"),
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    values: dict

    def __getitem__(self, k):
        return self.values[k]

    def get(self, k):
        return self.values.get(k)

    @classmethod
    def load(cls, path=None, overrides=None):
        raw = {}
        if path is not None:
            with open(path) as fh:
                for n, line in enumerate(fh, 1):
                    line = line.split("#", 1)[0].strip()
                    if not line:
                        continue
                    k, sep, v = line.partition("=")
                    if not sep:
                        raise ConfigError(f"{path}:{n}: expected key=value")
                    raw[k.strip()] = v.strip()
        raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
        vals = {k: d for k, (_, d, _) in KEYS.items()}
        for k, v in raw.items():
            if k not in KEYS:
                raise ConfigError(f"unknown key {k!r}")
            try:
                vals[k] = KEYS[k][0](v)
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"bad value for {k}: {v!r} ({exc})") from None
        return cls(vals)

    def outdir(self):
        return self.values.get("outdir") or os.environ.get(ENV_OUTDIR) or "."

    def weight(self, grid):
        rho = self["rho"] if self["rho"] is not None else grid.T / 4
        return WeightSpec(rho=rho, profile=self["profile"], amplitude=self["amplitude"])

    def solver_config(self):
        return SolverConfig(
            method=self["solver"], max_iters=self["max_iters"], lambda_max=self["lambda_max"],
            lambda_min=self["lambda_min"], decay=self["decay"], rho=self["penalty"],
            dual_tol=self["dual_tol"], tol=self["tol"],
        )

    def system(self, N=None):
        N = N if N is not None else (self["N"] or 256)
        J = self["J"] if self["J"] is not None else default_J(N)
        seq = preset_from_name(self["preset"], J)
        spacing = None if self["eta"] is None else Fraction(self["eta"]) / N
        return build_digital_system(seq, N, J, spacing)

    def sweep_config(self, preset=None):
        return SweepConfig(
            preset=preset or self["preset"], j_min=self["j_min"], j_max=self["j_max"],
            epsilon=self["epsilon"], eps_prime=self["eps_prime"], c=self["c"],
            h1_pixels=self["h1_pixels"], N=self["N"] or 512, J=self["J"],
            eta=None if self["eta"] is None else int(self["eta"]),
            weight=None if self["rho"] is None else WeightSpec(self["rho"], self["profile"], self["amplitude"]),
            solver=self.solver_config(), diagnostics=self["diagnostics"],
        )

    def mask_h(self, grid):
        if self["h"] is not None:
            return self["h"]
        if self["h_pixels"] is not None:
            return self["h_pixels"] * grid.pixel
        return None


def _out(cfg, name):
    return os.path.join(cfg.outdir(), name)


def _prepare_outdir(cfg):
    d = cfg.outdir()
    try:
        os.makedirs(d, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {d}: {exc}") from exc
    if not os.access(d, os.W_OK):
        raise PermissionError(f"output directory {d} is not writable")


def _need(cfg, *keys):
    for k in keys:
        if cfg.get(k) is None:
            raise ConfigError(f"missing required key {k!r}")


def _header(sys, **kw):
    h = {"N": sys.N, "J": sys.J, "T": sys.grid.T, "rho": 0.0, "h": 0.0}
    h.update(kw)
    return h


def _load_image(path):
    if path is None:
        raise ConfigError("--input is required")
    img, hdr = uio.read_raw(path)
    return img, hdr


def _mask_for(cfg, sys, args):
    if args.mask is not None:
        mask, _ = uio.read_mask(args.mask)
        if mask.shape != (sys.N, sys.N):
            raise ConfigError("mask size does not match the image")
        return mask, 0.0
    h = cfg.mask_h(sys.grid)
    if h is None:
        raise ConfigError("a mask is required: give --mask, h or h_pixels")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptyMask)
        _, mask = make_mask(h, sys)
    return mask, h


# --------------------------------------------------------------------------
# commands


def cmd_describe(cfg, args, out):
    sys_ = cfg.system()
    out.write(f"# {sys_.grid.header()}\n")
    out.write(f"# preset={cfg['preset']} sequence={sys_.seq}\n")
    out.write(band_listing(sys_.bands))
    for j in range(sys_.J):
        n = sum(1 for b in sys_.bands if b.j == j)
        out.write(f"# scale {j}: {n} bands\n")
    out.write(f"band_count={band_count(sys_.seq)}\n")
    out.write(f"tiling_residual={tiling_residual(sys_)!r}\n")
    return EXIT_OK


def cmd_model(cfg, args, out):
    _need(cfg, "j")
    sys_ = cfg.system()
    spec = cfg.weight(sys_.grid)
    _prepare_outdir(cfg)
    m = filtered_model(cfg["j"], sys_, spec)
    hdr = {"N": sys_.N, "j": cfg["j"], "T": sys_.grid.T, "rho": spec.rho, "h": 0.0}
    path = _out(cfg, f"model_j{cfg['j']}.raw")
    uio.write_raw(path, m.image, hdr)
    uio.write_pgm(_out(cfg, f"model_j{cfg['j']}.pgm"), m.image)
    out.write(f"# {sys_.grid.header()}\nwrote {path}\n")
    return EXIT_OK


def cmd_mask(cfg, args, out):
    sys_ = cfg.system()
    h = cfg.mask_h(sys_.grid)
    if h is None:
        raise ConfigError("mask needs h or h_pixels")
    _prepare_outdir(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptyMask)
        spec, mask = make_mask(h, sys_)
    uio.write_mask(_out(cfg, "mask.raw"), mask, _header(sys_, h=h))
    uio.write_pgm(_out(cfg, "mask.pgm"), mask.astype(float))
    out.write(f"# {sys_.grid.header()}\nh={spec.h!r}\ncolumns={spec.columns[0]}..{spec.columns[1]}\ncount={spec.count}\n")
    return EXIT_OK


def cmd_analyze(cfg, args, out):
    img, hdr = _load_image(args.input)
    sys_ = cfg.system(img.shape[0])
    _prepare_outdir(cfg)
    coeffs = analyze(img, sys_)
    uio.write_coefficients(_out(cfg, "coefficients.unsh"), coeffs.data, sys_.N, sys_.J)
    out.write(f"# {sys_.grid.header()}\nbands={len(coeffs)}\nl1_analysis={l1_analysis_norm(img, sys_)!r}\n")
    return EXIT_OK


def cmd_synthesize(cfg, args, out):
    if args.input is None:
        raise ConfigError("--input is required")
    data, N, J = uio.read_coefficients(args.input)
    if cfg["J"] is not None and cfg["J"] != J:
        raise ConfigError(f"dump has J={J}, config has J={cfg['J']}")
    cfg.values["J"] = J
    sys_ = cfg.system(N)
    if data.shape[0] != sys_.n_coeff_bands:
        raise ConfigError(f"dump has {data.shape[0]} bands, system has {sys_.n_coeff_bands}")
    _prepare_outdir(cfg)
    img = synthesize(CoefficientSet(data), sys_)
    uio.write_raw(_out(cfg, "synthesized.raw"), img, _header(sys_))
    out.write(f"# {sys_.grid.header()}\nwrote {_out(cfg, 'synthesized.raw')}\n")
    return EXIT_OK


def _reference_error(args, rec_img, sys_):
    if args.reference is None:
        return ""
    ref, _ = uio.read_raw(args.reference)
    return f"rel_err_l1a={relative_error(rec_img, ref, sys_)!r}\n"


def cmd_inpaint(cfg, args, out):
    img, hdr = _load_image(args.input)
    sys_ = cfg.system(img.shape[0])
    mask, h = _mask_for(cfg, sys_, args)
    solver = cfg.solver_config()
    _prepare_outdir(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = inpaint_l1(project_known(img, mask), mask, sys_, solver)
    uio.write_raw(_out(cfg, "recovered.raw"), rep.image, _header(sys_, h=h, rho=hdr.get("rho", 0.0)))
    text = rep.as_text() + _reference_error(args, rep.image, sys_)
    with open(_out(cfg, "report.txt"), "w") as fh:
        fh.write(text)
    out.write(text)
    return EXIT_OK if rep.converged else EXIT_NONCONV


def cmd_threshold(cfg, args, out):
    img, hdr = _load_image(args.input)
    sys_ = cfg.system(img.shape[0])
    mask, h = _mask_for(cfg, sys_, args)
    y = project_known(img, mask)
    if cfg["beta"] is not None:
        beta = cfg["beta"]
    elif cfg["beta_quantile"] is not None:
        beta = beta_quantile(y, sys_, cfg["beta_quantile"])
    else:
        raise ConfigError("threshold needs beta or beta_quantile")
    _prepare_outdir(cfg)
    rep = inpaint_threshold_onestep(y, mask, sys_, beta, cone=cfg["cone"])
    uio.write_raw(_out(cfg, "thresholded.raw"), rep.image, _header(sys_, h=h))
    text = f"beta={beta!r}\nkept={rep.kept}\n" + rep.as_text() + _reference_error(args, rep.image, sys_)
    with open(_out(cfg, "report.txt"), "w") as fh:
        fh.write(text)
    out.write(text)
    return EXIT_OK


def cmd_diagnose(cfg, args, out):
    _need(cfg, "j")
    sys_ = cfg.system()
    h = cfg.mask_h(sys_.grid)
    if h is None:
        raise ConfigError("diagnose needs h or h_pixels")
    spec = cfg.weight(sys_.grid)
    _prepare_outdir(cfg)
    j = cfg["j"]
    x0 = filtered_model(j, sys_, spec).image
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptyMask)
        _, mask = make_mask(h, sys_)
    cl = build_cluster(j, cfg["epsilon"], sys_, neighbor_extension=True)
    d = delta_sparsity(x0, cl, sys_)
    mu = cluster_coherence(cl, mask, sys_)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = inpaint_l1(project_known(x0, mask), mask, sys_, cfg.solver_config())
    observed = float(np.sum(np.abs(lattice_transform(sys_).analyze(rep.image - x0))))
    cert = verify_error_bound(d.delta, mu, observed)
    row = {
        "j": j, "epsilon": cfg["epsilon"], "h": float(h), "delta_j": d.delta, "mu_c": mu,
        "bound": cert.bound, "observed_error": observed, "truncation_flags": f"tail={d.tail!r};{cert.label}",
    }
    write_diagnostics_csv(_out(cfg, "diagnostics.csv"), [row])
    out.write("".join(f"{k}={v!r}\n" if isinstance(v, float) else f"{k}={v}\n" for k, v in row.items()))
    return EXIT_OK if rep.converged else EXIT_NONCONV


def _finish_table(cfg, name, records, table, out):
    write_records(_out(cfg, f"{name}.csv"), records)
    write_reports(_out(cfg, f"{name}_reports.txt"), records)
    uio.write_pgm(_out(cfg, f"{name}.pgm"), plot_errors(table), scale=False)
    for p in table.presets:
        try:
            fit = fit_decay_rate(table.records[p])
            out.write(f"{p}: slope={fit.slope:.4f} residual={fit.residual:.4f}\n")
        except DegenerateInput as exc:
            out.write(f"{p}: slope unavailable ({exc})\n")
    out.write(f"wrote {_out(cfg, name + '.csv')}\n")


def cmd_sweep(cfg, args, out):
    sc = cfg.sweep_config()
    _prepare_outdir(cfg)
    recs = run_sweep(sc)
    _finish_table(cfg, "sweep", recs, ComparisonTable([sc.preset], {sc.preset: recs}), out)
    return EXIT_OK


def cmd_compare(cfg, args, out):
    presets = [p.strip() for p in cfg["presets"].split(";") if p.strip()]
    configs = [cfg.sweep_config(p) for p in presets]
    _prepare_outdir(cfg)
    table = compare_presets(configs)
    recs = [r for p in table.presets for r in table.records[p]]
    _finish_table(cfg, "compare", recs, table, out)
    return EXIT_OK


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def build_parser():
    p = argparse.ArgumentParser(prog="unishear", description="Universal shearlet transforms and l1-analysis inpainting.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--input", help="input raw image or coefficient dump")
    p.add_argument("--mask", help="mask raw file (alternative to h / h_pixels)")
    p.add_argument("--reference", help="reference raw image for the relative error")
    for k, (_, _, hlp) in KEYS.items():
        p.add_argument(f"--{k}", dest=f"key_{k}", metavar="VALUE", help=hlp)
    return p


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    overrides = {k: getattr(args, f"key_{k}") for k in KEYS}
    try:
        cfg = RunConfig.load(args.config, overrides)
        return HANDLERS[args.command](cfg, args, out)
    except TilingFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TILING
    except (OSError, uio.FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(parser.format_usage(), file=sys.stderr, end="")
        return EXIT_CONFIG


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
