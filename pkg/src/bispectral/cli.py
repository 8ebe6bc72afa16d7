"""Command-line interface: ``bnn <subcommand>``.

Exit codes: 0 success, 1 usage or data error, 2 soft failure (training hit
``max_epochs`` without a plateau, or a recovered table is not isomorphic).
Options may also come from ``--config FILE`` (``key = value`` lines); flags on
the command line win over the file, which wins over built-in defaults.
"""

import logging
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import io
from .attacks import AttackConfig, attack as run_attack
from .cayley import MAX_ISOMORPHISM_ORDER, recover
from .data import generate, split
from .exceptions import BispectralError, ConfigError, DomainError
from .groups import make_group
from .network import check_weights
from .spectral import (
    bispectrum,
    character_table,
    gft,
    power_spectrum,
    random_generic_signal,
)
from .training import LOG_COLUMNS, TrainConfig, equivariance_report, invariance_error, train as run_train

logger = logging.getLogger("bispectral")

EXIT_OK, EXIT_ERROR, EXIT_SOFT = 0, 1, 2


def _resolved(ctx):
    values = dict(ctx.params)
    values["command"] = ctx.command.name
    return values


def _load_weights(spec, group):
    if spec == "analytic":
        return character_table(group).unit_rows()
    W = check_weights(io.load_weights(spec))
    if W.shape[0] != group.order:
        raise DomainError(f"weights of size {W.shape[0]} do not match group of order {group.order}")
    return W


def _config_default_map(path, commands):
    values = io.read_config(path)
    values.pop("command", None)
    default_map, used = {}, set()
    for name, cmd in commands.items():
        params = {p.name for p in cmd.params}
        default_map[name] = {k: v for k, v in values.items() if k in params}
        used |= default_map[name].keys()
    unknown = set(values) - used
    if unknown:
        raise ConfigError(f"{path}: unknown option(s) {', '.join(sorted(unknown))}")
    return default_map


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", type=click.Path(exists=True, dir_okay=False), help="key = value option file.")
@click.option("--threads", type=int, envvar="BNN_THREADS", default=None, help="Cap on BLAS worker threads.")
@click.option("-v", "--verbose", is_flag=True)
@click.pass_context
def cli(ctx, config, threads, verbose):
    """Bispectral neural networks on finite commutative groups."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(message)s")
    if config:
        ctx.default_map = _config_default_map(config, cli.commands)
    if threads:
        from threadpoolctl import threadpool_limits

        ctx.with_resource(threadpool_limits(limits=threads))


group_option = click.option("--group", "group_spec", required=True, help='Cyclic factors, e.g. "8" or "4,2".')


@cli.command("gen-data")
@group_option
@click.option("--exemplars", default=100, show_default=True)
@click.option("--fraction", default=1.0, show_default=True, help="Fraction of each orbit kept.")
@click.option("--normalize/--no-normalize", default=False, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.pass_context
def gen_data(ctx, group_spec, exemplars, fraction, normalize, seed, out):
    """Generate a synthetic orbit dataset."""
    ds = generate(group_spec, exemplars, fraction, seed=seed, normalize=normalize)
    io.save_dataset(out, ds)
    io.write_config(out + ".config", _resolved(ctx))
    click.echo(f"wrote {len(ds)} samples in {ds.n_classes} classes to {out}")
    return EXIT_OK


@cli.command()
@click.option("--data", type=click.Path(exists=True, dir_okay=False), help="Dataset file (BNND).")
@click.option("--group", "group_spec", help="Generate data inline over this group.")
@click.option("--exemplars", default=100, show_default=True)
@click.option("--fraction", default=1.0, show_default=True)
@click.option("--normalize/--no-normalize", default=False, show_default=True)
@click.option("--val-fraction", default=0.0, show_default=True)
@click.option("--gamma", default=1.0, show_default=True)
@click.option("--base-lr", default=0.002, show_default=True)
@click.option("--min-lr", default=1e-4, show_default=True)
@click.option("--max-lr", default=5e-3, show_default=True)
@click.option("--lr-step-epochs", default=10.0, show_default=True)
@click.option("--batch-size", default=100, show_default=True)
@click.option("--per-class", type=int, default=None, help="Samples per class in a batch [auto].")
@click.option("--max-epochs", default=2000, show_default=True)
@click.option("--plateau-patience", default=50, show_default=True)
@click.option("--plateau-tol", default=1e-6, show_default=True)
@click.option("--anneal-epochs", default=50, show_default=True)
@click.option("--n-init", default=1, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out-dir", default="run", show_default=True, type=click.Path(file_okay=False))
@click.pass_context
def train(ctx, data, group_spec, exemplars, fraction, normalize, val_fraction, seed, out_dir, **opts):
    """Train a bispectral network; writes weights.bnnw, log.csv and config.txt."""
    if data:
        ds = io.load_dataset(data)
    elif group_spec:
        ds = generate(group_spec, exemplars, fraction, seed=seed, normalize=normalize)
    else:
        raise click.UsageError("give --data or --group")
    if len(ds) == 0:
        raise ConfigError("dataset is empty")
    train_ds, val_ds = split(ds, val_fraction, seed=seed) if val_fraction > 0 else (ds, None)
    cfg = TrainConfig(seed=seed, **opts)
    result = run_train(train_ds, cfg)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.save_weights(out / "weights.bnnw", result.weights)
    io.write_log(out / "log.csv", result.log, LOG_COLUMNS)
    io.write_config(out / "config.txt", _resolved(ctx))
    last = result.log[-1]
    click.echo(
        f"{result.stop_reason} after {result.n_epochs} epochs: "
        f"loss {last['mean_loss']:.3g} (orbit {last['mean_orbit_term']:.3g}, "
        f"recon {last['mean_recon_term']:.3g})"
    )
    if val_ds is not None and len(val_ds):
        from .network import loss_and_gradient

        value, _ = loss_and_gradient(result.weights, val_ds.X, val_ds.labels, cfg.gamma, need_grad=False)
        click.echo(f"validation loss per sample {value.total / value.n_samples:.3g}")
    if ds.group.order <= MAX_ISOMORPHISM_ORDER:
        report = recover(result.weights, ds.group)
        click.echo(f"cayley: latin={report.is_latin} isomorphic_to={report.isomorphic_to}")
    click.echo(f"wrote {out / 'weights.bnnw'}")
    return EXIT_OK if result.converged else EXIT_SOFT


@cli.command("eval")
@click.option("--weights", required=True, help='Weight file or "analytic".')
@group_option
@click.option("--signals", type=click.Path(exists=True, dir_okay=False), help="Signal file; default random.")
@click.option("--num-signals", default=50, show_default=True)
@click.option("--seed", default=12345, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="CSV report path [stdout].")
@click.pass_context
def evaluate(ctx, weights, group_spec, signals, num_signals, seed, out):
    """Invariance and equivariance of a network over the whole group."""
    group = make_group(group_spec)
    W = _load_weights(weights, group)
    if signals:
        X = io.read_signals(signals)
    else:
        X = np.random.default_rng(seed).standard_normal((num_signals, group.order))
    if X.shape[1] != group.order:
        raise DomainError(f"signals have length {X.shape[1]}, group order is {group.order}")
    rows = []
    for k, x in enumerate(X):
        rep = equivariance_report(W, x, group)
        rows.append(
            {
                "signal": k,
                "max_invariance_error": invariance_error(W, x, group),
                "max_modulus_variation": rep.max_modulus_variation,
                "max_phase_residual": rep.max_phase_residual,
            }
        )
    columns = ["signal", "max_invariance_error", "max_modulus_variation", "max_phase_residual"]
    if out:
        io.write_log(out, rows, columns)
        io.write_config(out + ".config", _resolved(ctx))
    else:
        click.echo(",".join(columns))
        for r in rows:
            click.echo(",".join(str(r[c]) if c == "signal" else io.fmt(r[c]) for c in columns))
    worst = max(r["max_invariance_error"] for r in rows)
    click.echo(f"max invariance error {worst:.3g} over {len(rows)} signals", err=True)
    return EXIT_OK


@cli.command("extract-cayley")
@click.option("--weights", required=True, help='Weight file or "analytic".')
@group_option
@click.option("--out", type=click.Path(dir_okay=False), help="Also write the table as CSV.")
@click.pass_context
def extract_cayley(ctx, weights, group_spec, out):
    """Recover the Cayley table from weights and test it against a group."""
    group = make_group(group_spec)
    W = _load_weights(weights, group)
    report = recover(W, group if group.order <= MAX_ISOMORPHISM_ORDER else None)
    click.echo(report.format_table())
    click.echo(
        f"latin={report.is_latin} symmetric={report.is_symmetric} identity={report.identity} "
        f"ties={report.n_ties} min_score={report.match_scores.min():.6g}"
    )
    if out:
        np.savetxt(out, report.table, fmt="%d", delimiter=",")
        io.write_config(out + ".config", _resolved(ctx))
    if group.order > MAX_ISOMORPHISM_ORDER:
        click.echo(f"isomorphism search skipped (order {group.order} > {MAX_ISOMORPHISM_ORDER})")
        return EXIT_SOFT
    if report.isomorphic_to is not None:
        witness = " ".join(str(v) for v in report.witness_permutation)
        click.echo(f"ISOMORPHIC to {group} (witness: {witness})")
        return EXIT_OK
    click.echo(f"NOT ISOMORPHIC to {group}")
    return EXIT_SOFT


@cli.command("attack")
@click.option("--weights", required=True, help='Weight file or "analytic".')
@group_option
@click.option("--target", default="0", show_default=True, help="Signal file, or an integer seed.")
@click.option("--candidates", default=100, show_default=True)
@click.option("--representation", type=click.Choice(["bispectrum", "power_spectrum"]), default="bispectrum")
@click.option("--max-iter", default=20000, show_default=True)
@click.option("--lr", default=0.1, show_default=True)
@click.option("--tol", default=1e-6, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="CSV report path [stdout].")
@click.pass_context
def attack(ctx, weights, group_spec, target, candidates, representation, max_iter, lr, tol, seed, out):
    """Optimize random inputs to match a target's output; report orbit distances."""
    group = make_group(group_spec)
    W = _load_weights(weights, group)
    table = character_table(group)
    if os.path.exists(target):
        x = io.read_signals(target)[0].real
    else:
        try:
            target_seed = int(target)
        except ValueError:
            raise ConfigError(f"--target {target!r} is neither a file nor an integer seed") from None
        x = random_generic_signal(group.order, np.random.default_rng(target_seed), table=table)
    cfg = AttackConfig(lr=lr, max_iter=max_iter, tol=tol, representation=representation, seed=seed)
    result = run_attack(W, x, candidates, cfg, group=group)
    columns = ["candidate", "final_objective", "orbit_distance", "best_scalar", "iterations"]
    rows = [
        {
            "candidate": k,
            "final_objective": result.final_objectives[k],
            "orbit_distance": result.orbit_distances[k],
            "best_scalar": result.best_scalars[k],
            "iterations": int(result.iterations[k]),
        }
        for k in range(len(result.final_objectives))
    ]
    if out:
        io.write_log(out, rows, columns)
        io.write_config(out + ".config", _resolved(ctx))
    else:
        click.echo(",".join(columns))
        for r in rows:
            click.echo(",".join(str(r[c]) if isinstance(r[c], int) else io.fmt(r[c]) for c in columns))
    conv = result.converged
    rate = result.success_rate() if conv.any() else 0.0
    click.echo(
        f"{int(conv.sum())}/{len(conv)} converged; {rate:.0%} of converged within 1e-2 of the target orbit",
        err=True,
    )
    return EXIT_OK


@cli.command("spectra")
@click.option("--signal", "signal_path", required=True, type=click.Path(exists=True, dir_okay=False))
@group_option
@click.option("--kind", type=click.Choice(["gft", "power", "bispectrum", "all"]), default="all")
@click.option("--out", type=click.Path(dir_okay=False), help="CSV path [stdout].")
@click.pass_context
def spectra(ctx, signal_path, group_spec, kind, out):
    """Fourier transform, power spectrum and bispectrum of signals in a file."""
    group = make_group(group_spec)
    table = character_table(group)
    X = io.read_signals(signal_path)
    if X.shape[1] != group.order:
        raise DomainError(f"signals have length {X.shape[1]}, group order is {group.order}")
    lines = ["signal,quantity,i,j,real,imag"]
    for s, x in enumerate(X):
        fhat = gft(x, table)
        if kind in ("gft", "all"):
            lines += [f"{s},gft,{i},,{io.fmt(v.real)},{io.fmt(v.imag)}" for i, v in enumerate(fhat)]
        if kind in ("power", "all"):
            lines += [f"{s},power,{i},,{io.fmt(v)},0" for i, v in enumerate(power_spectrum(fhat))]
        if kind in ("bispectrum", "all"):
            b = bispectrum(fhat, table)
            lines += [
                f"{s},bispectrum,{i},{j},{io.fmt(v.real)},{io.fmt(v.imag)}"
                for i, j, v in zip(*b.pairs, b.values)
            ]
    text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text)
        io.write_config(out + ".config", _resolved(ctx))
    else:
        click.echo(text, nl=False)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        code = cli.main(args=argv, prog_name="bnn", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_ERROR
    except click.ClickException as exc:
        exc.show()
        return EXIT_ERROR
    except (BispectralError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_ERROR
    return code if isinstance(code, int) else EXIT_OK


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
