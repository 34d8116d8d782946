"""Command-line entry point: ``maxdaemon <subcommand> --config FILE --out DIR``.

Subcommands: lattice, greens, classical, epsilon, em.  Every run writes CSV
files plus ``manifest.json`` holding the resolved config, an input hash and
the list of outputs with their checksums.  Exit codes: 0 ok, 2 config
error (including values outside an operation's domain), 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from . import classical as cl
from . import dielectric as di
from . import emcavity as em
from . import greens as gr
from . import lattice as lat
from . import observables as ob
from .config import Key, parse_file, to_jsonable
from .errors import ConfigError, ContractError, DomainError, NumericalError

PI = np.pi

SCHEMAS = {
    "lattice": {
        "half_size": Key("int", 124),
        "upsilon0": Key("float", 0.1),
        "kappa_R": Key("float", PI / 4),
        "kappa_D": Key("float", PI),
        "state": Key("str", "boltzmann", ("boltzmann", "uniform")),
        "beta": Key("floats", (0.01,)),
        "tau_start": Key("float", 0.0),
        "tau_stop": Key("float", 20000.0),
        "tau_count": Key("int", 2001),
        "carpet_stride": Key("int", 10),
    },
    "greens": {
        "L": Key("float", 2.0),
        "M": Key("int", 2000),
        "P_R": Key("float", 20 * PI),
        "eta": Key("float", 1e-6),
        "strength": Key("float", 1.0),
        "potential": Key("str", "daemon", ("daemon", "constant")),
        "V0": Key("float", 1.0),
        "x": Key("floats", (-0.5, 0.0, 0.5)),
        "xp": Key("floats", (-0.25, 0.25)),
        "E": Key("floats", (10.0, 100.0, 1000.0)),
        "pole_E_min": Key("float", 1.0),
        "pole_E_max": Key("float", 5000.0),
    },
    "classical": {
        "n_particles": Key("int", 10000),
        "P_R": Key("float", 1.0),
        "P_UV": Key("float", 2.0),
        "x_L": Key("float", 1.0),
        "p_min_frac": Key("float", 0.1),
        "seed": Key("int", 0),
        "ensemble": Key("str", "sorting", ("sorting", "above_cutoff")),
        "dt": Key("float", 1.0),
        "n_steps": Key("int", 30),
        "particle_stride": Key("int", 1),
    },
    "epsilon": {
        "omega_over_c": Key("floats", (PI,)),
        "omega_R_over_c": Key("float", 16 * PI),
        "omega_UV_over_c": Key("opt_float", None),
        "mu_r": Key("float", 1.0),
        "eps0": Key("complex", 2.0 + 0j),
        "deps0": Key("complex", 1.0 + 0j),
        "x_min": Key("float", -1.0),
        "x_max": Key("float", 1.0),
        "x_count": Key("int", 401),
        "h": Key("float", 1e-3),
        "tol": Key("float", 1e-8),
        "harmonic": Key("bool", False),
    },
    "em": {
        "stack": Key("str", "graded_stack", ("graded_stack", "empty")),
        "n_half": Key("int", 6),
        "omega_p": Key("float", 3.0),
        "b": Key("float", 0.12),
        "L": Key("float", 12.0),
        "mu_r": Key("float", 1.0),
        "xi2": Key("float", 0.0),
        "n_modes": Key("int", 12),
        "tol": Key("float", 1e-6),
        "field": Key("bool", False),
        "b_init": Key("floats", (1.0,)),
        "tau_start": Key("float", 0.0),
        "tau_stop": Key("float", 30.0),
        "tau_count": Key("int", 301),
        "x_count": Key("int", 241),
    },
}


# ------------------------------------------------------------------ output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


class Writer:
    """Collects output files for the manifest."""

    def __init__(self, out: Path):
        self.out = out
        self.files: list[str] = []
        out.mkdir(parents=True, exist_ok=True)

    def csv(self, name: str, header, rows):
        path = self.out / name
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
        self.files.append(name)

    def manifest(self, command: str, cfg: dict):
        snap = {k: to_jsonable(v) for k, v in sorted(cfg.items())}
        canon = json.dumps({"command": command, "config": snap, "version": __version__}, sort_keys=True)
        outputs = []
        for name in self.files:
            digest = hashlib.sha256((self.out / name).read_bytes()).hexdigest()
            outputs.append({"file": name, "sha256": digest})
        doc = {
            "command": command,
            "version": __version__,
            "config": snap,
            "input_hash": hashlib.sha256(canon.encode()).hexdigest(),
            "outputs": outputs,
        }
        (self.out / "manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _pmap(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# -------------------------------------------------------------- subcommands


def run_lattice(cfg: dict, w: Writer, threads: int = 1):
    dc = lat.DaemonConfig(cfg["half_size"], cfg["upsilon0"], cfg["kappa_R"], cfg["kappa_D"])
    if cfg["tau_count"] < 1 or cfg["carpet_stride"] < 1:
        raise ConfigError("tau_count and carpet_stride must be >= 1")
    taus = np.linspace(cfg["tau_start"], cfg["tau_stop"], cfg["tau_count"])
    H = lat.build_hamiltonian(dc)
    eig = lat.diagonalize(H)
    basis = ob.free_energy_basis(dc)
    if cfg["state"] == "uniform":
        states = [lat.uniform_state(dc)]
    else:
        for b in cfg["beta"]:
            if not b > 0:
                raise ConfigError(f"beta must be > 0, got {b}")
        states = [lat.boltzmann_state(dc, b) for b in cfg["beta"]]
    fields = _pmap(lambda s: lat.evolve(eig, s, taus), states, threads)

    def entropy_rows(field):
        tr = ob.shannon_entropy(field, basis)
        return zip(tr.taus, tr.taus / 1000, tr.sigma)

    head = ["tau", "tau_e3", "sigma"]
    w.csv("entropy.csv", head, entropy_rows(fields[0]))
    if len(fields) > 1:
        for i, (b, f) in enumerate(zip(cfg["beta"], fields)):
            w.csv(f"entropy_beta{i:02d}.csv", head + ["beta"], ((*r, b) for r in entropy_rows(f)))
    field = fields[0]
    lp = ob.lateral_probability(field)
    w.csv("lateral_prob.csv", ["tau", "left", "right", "center"], zip(lp.taus, lp.left, lp.right, lp.center))
    le = ob.lateral_energy(field, H)
    w.csv("lateral_energy.csv", ["tau", "left", "right", "center"], zip(le.taus, le.left, le.right, le.center))
    pt = ob.potential_work_trace(field, dc)
    w.csv("potential.csv", ["tau", "potential", "running_mean"], zip(pt.taus, pt.potential, pt.running_mean))
    carpet = ob.density_carpet(field)
    idx = range(0, taus.size, cfg["carpet_stride"])
    sites = dc.sites
    w.csv("carpet.csv", ["tau", "n", "density"], ((taus[i], n, carpet[i, j]) for i in idx for j, n in enumerate(sites)))


def run_greens(cfg: dict, w: Writer, threads: int = 1):
    spec = gr.ContainerSpec(cfg["L"], cfg["M"], cfg["P_R"], cfg["eta"], cfg["strength"])
    E = np.asarray(cfg["E"], float)
    const = cfg["potential"] == "constant"
    blocks = gr.ConstantPotentialBlocks(spec, cfg["V0"]) if const else None
    rows = []
    for x in cfg["x"]:
        for xp in cfg["xp"]:
            g = gr.green_daemon(x, xp, E, spec, blocks=blocks).value
            gd = gr.green_delta(x, xp, E, cfg["V0"], spec) if const else np.full(E.shape, np.nan)
            for e, gv, dv in zip(E, np.atleast_1d(g), np.atleast_1d(gd)):
                row = [x, xp, e, gv.real, gv.imag]
                if const:
                    row += [dv.real, dv.imag]
                rows.append(row)
    head = ["x", "xp", "E", "re_G", "im_G"] + (["re_G_delta", "im_G_delta"] if const else [])
    w.csv("green_grid.csv", head, rows)
    poles = gr.find_poles(spec, (cfg["pole_E_min"], cfg["pole_E_max"]))
    w.csv(
        "poles.csv",
        ["energy", "kind", "parent"],
        ((p.energy, "new" if p.distinguished else p.kind, p.parent) for p in poles),
    )


def run_classical(cfg: dict, w: Writer, threads: int = 1):
    n = cfg["n_particles"]
    if n < 0 or cfg["n_steps"] < 0 or cfg["particle_stride"] < 1:
        raise ConfigError("n_particles, n_steps must be >= 0 and particle_stride >= 1")
    P_R, P_UV, x_L = cfg["P_R"], cfg["P_UV"], cfg["x_L"]
    if cfg["ensemble"] == "sorting":
        ens = cl.sorting_ensembles(n, P_R, P_UV, x_L, cfg["p_min_frac"], cfg["seed"])
    else:
        # |p| in (P_UV, 2 P_UV): the wall is transparent for everybody
        rng = np.random.default_rng(cfg["seed"])
        x = rng.uniform(-x_L, x_L, n)
        p = rng.choice([-1.0, 1.0], n) * rng.uniform(P_UV, 2 * P_UV, n)
        ens = cl.ClassicalEnsemble(x, p, P_R, P_UV, x_L)
    traj = cl.step_ensemble(ens, cfg["dt"], cfg["n_steps"])
    sel = range(0, len(ens), cfg["particle_stride"])
    w.csv(
        "trajectory.csv",
        ["step", "time", "particle", "x", "p"],
        ((s, t, i, traj.x[s, i], traj.p[s, i]) for s, t in enumerate(traj.times) for i in sel),
    )
    rows = []
    for s, t in enumerate(traj.times):
        o = cl.occupancy(ens, traj.x[s], traj.p[s])
        rows.append((s, t, o.slow_left, o.fast_right, o.left, o.temp_left, o.temp_right))
    w.csv("occupancy.csv", ["step", "time", "slow_left", "fast_right", "left", "temp_left", "temp_right"], rows)


def run_epsilon(cfg: dict, w: Writer, threads: int = 1):
    if cfg["x_count"] < 1 or not cfg["x_max"] > cfg["x_min"]:
        raise ConfigError("need x_count >= 1 and x_max > x_min")
    x = np.linspace(cfg["x_min"], cfg["x_max"], cfg["x_count"])
    base = di.InverseProblemSpec(
        omega_over_c=cfg["omega_over_c"][0],
        omega_R_over_c=cfg["omega_R_over_c"],
        mu_r=cfg["mu_r"],
        eps0=cfg["eps0"],
        deps0=cfg["deps0"],
        x_grid=x,
        omega_UV_over_c=cfg["omega_UV_over_c"],
        h=cfg["h"],
        tol=cfg["tol"],
    )
    specs = [replace(base, omega_over_c=float(om)) for om in cfg["omega_over_c"]]
    sols = _pmap(di.solve_epsilon_ode, specs, threads)
    head = ["omega_over_c", "ratio", "x", "re_eps", "im_eps"]
    if cfg["harmonic"]:
        head += ["re_eps_harmonic", "im_eps_harmonic"]
    rows = []
    for sp, sol in zip(specs, sols):
        har = di.harmonic_approx(x, sp).eps if cfg["harmonic"] else None
        for i in range(x.size):
            row = [sp.omega_over_c, sol.ratio, x[i], sol.eps[i].real, sol.eps[i].imag]
            if har is not None:
                row += [har[i].real, har[i].imag]
            rows.append(row)
    w.csv("epsilon.csv", head, rows)


def _stack(cfg: dict) -> em.BilayerStack:
    if cfg["stack"] == "empty":
        return em.BilayerStack((), cfg["b"], cfg["L"], cfg["mu_r"], cfg["xi2"])
    return em.graded_stack(cfg["n_half"], cfg["omega_p"], cfg["b"], cfg["L"], cfg["mu_r"], cfg["xi2"])


def run_em(cfg: dict, w: Writer, threads: int = 1):
    stack = _stack(cfg)
    n = cfg["n_modes"]
    if n < 1:
        raise ConfigError("n_modes must be >= 1")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", em.BranchWarning)
        modes = em.solve_modes(stack, n, tol=cfg["tol"])
    w.csv(
        "modes.csv",
        ["index", "re_omega", "im_omega", "residual"],
        ((i, om.real, om.imag, r) for i, (om, r) in enumerate(zip(modes.omegas, modes.residuals))),
    )
    if cfg["field"]:
        b = np.zeros(n)
        given = np.asarray(cfg["b_init"], float)
        if given.size > n:
            raise ConfigError(f"b_init has {given.size} entries, more than n_modes = {n}")
        b[: given.size] = given
        taus = np.linspace(cfg["tau_start"], cfg["tau_stop"], cfg["tau_count"])
        x = np.linspace(0, stack.L, cfg["x_count"])
        fr = em.reconstruct_field(modes, b, taus, x, stack.L)
        w.csv(
            "field.csv",
            ["x", "tau", "re_psi", "im_psi", "abs2"],
            ((x[j], t, v.real, v.imag, abs(v) ** 2) for i, t in enumerate(taus) for j, v in enumerate(fr.frames[i])),
        )


RUNNERS = {
    "lattice": run_lattice,
    "greens": run_greens,
    "classical": run_classical,
    "epsilon": run_epsilon,
    "em": run_em,
}


# ------------------------------------------------------------------- driver


def preset_dirs():
    dirs = []
    if os.environ.get("MAXDAEMON_PRESETS"):
        dirs.append(Path(os.environ["MAXDAEMON_PRESETS"]))
    dirs.append(Path.cwd() / "presets")
    dirs.append(Path(__file__).resolve().parents[2] / "presets")
    return dirs


def find_preset(name: str) -> Path:
    fname = name if name.endswith(".cfg") else name + ".cfg"
    for d in preset_dirs():
        if (d / fname).is_file():
            return d / fname
    raise ConfigError(f"preset {name!r} not found in {', '.join(str(d) for d in preset_dirs())}")


def resolve_config(command: str, config: str | None, preset: str | None) -> dict:
    if config and preset:
        raise ConfigError("give either --config or --preset, not both")
    schema = SCHEMAS[command]
    if config or preset:
        cfg = parse_file(config or find_preset(preset), schema)
    else:
        cfg = {k: v.default for k, v in schema.items()}
    declared = cfg.pop("command", command)
    if declared != command:
        raise ConfigError(f"config is for {declared!r}, not {command!r}")
    return cfg


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="maxdaemon", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="flat key = value config file")
        sp.add_argument("--preset", help="name of a file in presets/")
        sp.add_argument("--out", default=f"out/{name}", help="output directory")
        sp.add_argument("--threads", type=int, default=1, help="workers for independent sub-runs")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = resolve_config(args.command, args.config, args.preset)
        w = Writer(Path(args.out))
        RUNNERS[args.command](cfg, w, args.threads)
        w.manifest(args.command, cfg)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ContractError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
