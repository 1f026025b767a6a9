"""Command-line front end: train, predict, evaluate, inject typos, sweep.

Every command resolves its settings as flags > config file > defaults and
writes the fully resolved values next to its outputs. Exit codes: 0 on
success, 1 on user or configuration errors, 2 on internal errors.
"""

from __future__ import annotations

import functools
import random
import sys
from pathlib import Path
from typing import Callable, Optional

import click

from . import crf, pipeline
from .context import SIMILARITY_KEYS, ContextConfig
from .corpus import ConllParseError, Corpus, dump_conll, load_conll
from .crf import CrfModel, ModelFormatError, TrainConfig
from .evaluation import EvalReport, SweepRow, format_report, score, sweep_report
from .synthetic import generate_corpus
from .typos import OPERATIONS, TypoConfig, corruption_log_csv, inject

DEFAULT_WINDOWS = (0, 1, 8, 32, 128, 512)

_TRAIN_DEFAULTS = TrainConfig()
_TYPO_DEFAULTS = TypoConfig()


class CliUsageError(ValueError):
    """A user or configuration mistake; reported on stderr with exit code 1."""


def _guard(fn: Callable) -> Callable:
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            fn(*args, **kwargs)
        except (CliUsageError, ConllParseError, ModelFormatError, ValueError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
        except Exception as exc:  # pragma: no cover - invariant violations
            click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
            sys.exit(2)

    return wrapper


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise CliUsageError(f"expected a boolean, got {text!r}")


def _parse_windows(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise CliUsageError(f"expected comma-separated integers, got {text!r}") from None


def _parse_ops(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


class _Settings:
    """Flag > config-file > default resolution, remembering resolved values."""

    def __init__(self, config_file: Optional[str]) -> None:
        self.file_values: dict[str, str] = {}
        self.resolved: dict[str, object] = {}
        if config_file:
            path = Path(config_file)
            for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
                stripped = line.strip()
                if not stripped or stripped.startswith("#"):
                    continue
                if "=" not in stripped:
                    raise CliUsageError(f"{path}: line {lineno}: expected key=value")
                key, _, value = stripped.partition("=")
                self.file_values[key.strip()] = value.strip()

    def get(self, key: str, flag_value, default, cast: Callable = str):
        if flag_value is not None:
            value = flag_value
        elif key in self.file_values:
            raw = self.file_values[key]
            try:
                value = cast(raw)
            except CliUsageError:
                raise
            except ValueError:
                raise CliUsageError(f"config key {key}: cannot parse {raw!r}") from None
        else:
            value = default
        self.resolved[key] = value
        return value

    def write_resolved(self, out_dir: Path, inputs: dict[str, object]) -> None:
        def fmt(value: object) -> str:
            if isinstance(value, bool):
                return "true" if value else "false"
            if isinstance(value, (tuple, list)):
                return ",".join(str(v) for v in value)
            return str(value)

        entries = {**inputs, **self.resolved}
        text = "\n".join(f"{k} = {fmt(v)}" for k, v in sorted(entries.items())) + "\n"
        (out_dir / "config.resolved").write_text(text, encoding="utf-8")


def _train_config(settings: _Settings, epochs, learning_rate, l2, batch_size, seed) -> TrainConfig:
    return TrainConfig(
        epochs=settings.get("epochs", epochs, _TRAIN_DEFAULTS.epochs, int),
        learning_rate=settings.get("lr", learning_rate, _TRAIN_DEFAULTS.learning_rate, float),
        l2=settings.get("l2", l2, _TRAIN_DEFAULTS.l2, float),
        batch_size=settings.get("batch_size", batch_size, _TRAIN_DEFAULTS.batch_size, int),
        seed=settings.get("seed", seed, _TRAIN_DEFAULTS.seed, int),
        shuffle=settings.get("shuffle", None, _TRAIN_DEFAULTS.shuffle, _parse_bool),
    )


def _typo_config(settings: _Settings, typo_rate, typo_ops, target, seed) -> TypoConfig:
    return TypoConfig(
        rate=settings.get("typo_rate", typo_rate, _TYPO_DEFAULTS.rate, float),
        operations=settings.get("typo_ops", _parse_ops(typo_ops) if typo_ops else None,
                                OPERATIONS, _parse_ops),
        target=settings.get("target", target, _TYPO_DEFAULTS.target, str),
        seed=settings.get("seed", seed, _TYPO_DEFAULTS.seed, int),
    )


def _load_corpus(path: str) -> Corpus:
    corpus = load_conll(path)
    if corpus.repair_count:
        click.echo(f"{path}: repaired {corpus.repair_count} BIO tags", err=True)
    return corpus


def _as_predicted(corpus: Corpus) -> Corpus:
    """Reinterpret a parsed tag file as a prediction layer."""
    labels = [[s.gold_labels for s in d.sentences] for d in corpus.documents]
    return corpus.with_predicted(labels)


def _dev_f1(model_predict: Callable[[Corpus], list], dev: Corpus) -> float:
    predictions = model_predict(dev)
    return score(dev, dev.with_predicted(predictions)).overall.f1


def _out_dir(explicit: Optional[str], fallback: str) -> Path:
    path = Path(explicit) if explicit else Path(fallback)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _echo_epoch(epoch: int, loss: float) -> None:
    click.echo(f"epoch {epoch}: loss {loss:.4f}")


def _train_options(fn: Callable) -> Callable:
    for option in reversed(
        (
            click.option("--epochs", type=int, default=None, help="SGD epochs."),
            click.option("--lr", "learning_rate", type=float, default=None, help="Initial learning rate."),
            click.option("--l2", type=float, default=None, help="L2 regularization strength."),
            click.option("--batch-size", type=int, default=None, help="Mini-batch size."),
            click.option("--seed", type=int, default=None, help="RNG seed."),
            click.option("--config", "config_file", type=str, default=None,
                         help="key=value config file; flags take precedence."),
            click.option("--out-dir", type=str, default=None,
                         help="Directory for auxiliary outputs (resolved config, reports)."),
        )
    ):
        fn = option(fn)
    return fn


@click.group()
@click.version_option(package_name="mica-ner", prog_name="mica")
def main() -> None:
    """Two-pass typo-robust named-entity tagger."""


@main.command("train")
@click.argument("train_file")
@click.argument("dev_file")
@click.argument("model_out")
@_train_options
@_guard
def cmd_train(train_file, dev_file, model_out, epochs, learning_rate, l2, batch_size,
              seed, config_file, out_dir) -> None:
    """Train the baseline CRF on handcrafted features only."""
    settings = _Settings(config_file)
    train_config = _train_config(settings, epochs, learning_rate, l2, batch_size, seed)
    train_corpus = _load_corpus(train_file)
    dev_corpus = _load_corpus(dev_file)
    if not train_corpus.documents:
        raise CliUsageError(f"{train_file}: empty training corpus")

    model = pipeline.train_first_pass(train_corpus, train_config, on_epoch=_echo_epoch)
    crf.save_model(model, model_out)

    directory = _out_dir(out_dir, str(Path(model_out).parent or "."))
    settings.write_resolved(directory, {"command": "train", "train_file": train_file,
                                        "dev_file": dev_file, "model_out": model_out})
    f1 = _dev_f1(lambda c: pipeline.predict_corpus(model, c), dev_corpus)
    click.echo(f"dev F1 = {100 * f1:.2f}")


@main.command("mica-train")
@click.argument("train_file")
@click.argument("dev_file")
@click.argument("models_out")
@click.option("--window", type=int, default=None, help="Context sentences on each side.")
@_train_options
@_guard
def cmd_mica_train(train_file, dev_file, models_out, window, epochs, learning_rate, l2,
                   batch_size, seed, config_file, out_dir) -> None:
    """Train both passes; writes pass1.crf and pass2.crf under MODELS_OUT."""
    settings = _Settings(config_file)
    train_config = _train_config(settings, epochs, learning_rate, l2, batch_size, seed)
    context = ContextConfig(window=settings.get("window", window, 0, int))
    train_corpus = _load_corpus(train_file)
    dev_corpus = _load_corpus(dev_file)

    click.echo("pass 1:")
    pass1 = pipeline.train_first_pass(train_corpus, train_config, on_epoch=_echo_epoch)
    predictions = pipeline.predict_corpus(pass1, train_corpus)
    click.echo("pass 2:")
    pass2 = pipeline.train_second_pass(
        train_corpus, predictions, context, train_config, on_epoch=_echo_epoch
    )

    directory = _out_dir(out_dir, models_out)
    models_dir = Path(models_out)
    models_dir.mkdir(parents=True, exist_ok=True)
    crf.save_model(pass1, models_dir / "pass1.crf")
    crf.save_model(pass2, models_dir / "pass2.crf")
    settings.write_resolved(directory, {"command": "mica-train", "train_file": train_file,
                                        "dev_file": dev_file, "models_out": models_out})
    f1 = _dev_f1(
        lambda c: pipeline.two_pass_predict_corpus(c, pass1, pass2, context), dev_corpus
    )
    click.echo(f"dev F1 = {100 * f1:.2f}")


def _check_model_roles(model: Optional[CrfModel], pass2: Optional[CrfModel]) -> None:
    sim_keys = set(SIMILARITY_KEYS)
    if model is not None and sim_keys & model.feature_vocabulary:
        raise CliUsageError(
            "--model points at a similarity-enriched second-pass model; "
            "use --pass1/--pass2 instead"
        )
    if pass2 is not None and not sim_keys & pass2.feature_vocabulary:
        raise CliUsageError(
            "--pass2 model has no sim:* features; it looks like a first-pass model"
        )


@main.command("predict")
@click.argument("input_file")
@click.argument("output_file")
@click.option("--model", "model_file", type=str, default=None, help="Single-pass model file.")
@click.option("--pass1", "pass1_file", type=str, default=None, help="First-pass model file.")
@click.option("--pass2", "pass2_file", type=str, default=None, help="Second-pass model file.")
@click.option("--window", type=int, default=None, help="Context sentences on each side.")
@click.option("--config", "config_file", type=str, default=None)
@click.option("--out-dir", type=str, default=None)
@_guard
def cmd_predict(input_file, output_file, model_file, pass1_file, pass2_file, window,
                config_file, out_dir) -> None:
    """Tag a CoNLL file with one model (plain) or two (two-pass)."""
    settings = _Settings(config_file)
    if model_file and (pass1_file or pass2_file):
        raise CliUsageError("--model cannot be combined with --pass1/--pass2")
    if bool(pass1_file) != bool(pass2_file):
        missing = "--pass1" if pass2_file else "--pass2"
        raise CliUsageError(f"two-pass prediction needs both models; {missing} is missing")
    if not model_file and not pass1_file:
        raise CliUsageError("give either --model or --pass1 and --pass2")

    corpus = _load_corpus(input_file)
    if model_file:
        model = crf.load_model(model_file)
        _check_model_roles(model, None)
        predictions = pipeline.predict_corpus(model, corpus)
    else:
        pass1 = crf.load_model(pass1_file)
        pass2 = crf.load_model(pass2_file)
        _check_model_roles(None, pass2)
        context = ContextConfig(window=settings.get("window", window, 0, int))
        predictions = pipeline.two_pass_predict_corpus(corpus, pass1, pass2, context)

    dump_conll(corpus.with_predicted(predictions), output_file, "predicted")
    directory = _out_dir(out_dir, str(Path(output_file).parent or "."))
    settings.write_resolved(directory, {"command": "predict", "input_file": input_file,
                                        "output_file": output_file})


@main.command("eval")
@click.argument("gold_file")
@click.argument("pred_file")
@click.option("--out-dir", type=str, default=None, help="Also write the report there.")
@_guard
def cmd_eval(gold_file, pred_file, out_dir) -> None:
    """Entity-level scores of PRED_FILE against GOLD_FILE."""
    gold = _load_corpus(gold_file)
    predicted = _as_predicted(_load_corpus(pred_file))
    report = score(gold, predicted)
    text = format_report(report)
    click.echo(text, nl=False)
    if out_dir:
        directory = _out_dir(out_dir, out_dir)
        (directory / "eval.txt").write_text(text, encoding="utf-8")
        settings = _Settings(None)
        settings.write_resolved(directory, {"command": "eval", "gold_file": gold_file,
                                            "pred_file": pred_file})


@main.command("inject")
@click.argument("input_file")
@click.argument("output_file")
@click.option("--typo-rate", type=float, default=None, help="Corruption probability per token.")
@click.option("--typo-ops", type=str, default=None,
              help=f"Comma-separated subset of {','.join(OPERATIONS)}.")
@click.option("--target", type=str, default=None, help="entities_only or all_tokens.")
@click.option("--seed", type=int, default=None)
@click.option("--config", "config_file", type=str, default=None)
@click.option("--out-dir", type=str, default=None)
@_guard
def cmd_inject(input_file, output_file, typo_rate, typo_ops, target, seed, config_file,
               out_dir) -> None:
    """Corrupt a gold corpus; writes the corpus, a log, and the config."""
    settings = _Settings(config_file)
    typo_config = _typo_config(settings, typo_rate, typo_ops, target, seed)
    corpus = _load_corpus(input_file)
    corrupted, log = inject(corpus, typo_config)
    dump_conll(corrupted, output_file, "gold")
    directory = _out_dir(out_dir, str(Path(output_file).parent or "."))
    (directory / "typo_log.csv").write_text(corruption_log_csv(log), encoding="utf-8")
    settings.write_resolved(directory, {"command": "inject", "input_file": input_file,
                                        "output_file": output_file})
    click.echo(f"corrupted {len(log)} tokens")


@main.command("sweep")
@click.argument("train_file")
@click.argument("dev_file")
@click.argument("test_file")
@click.option("--windows", type=str, default=None,
              help="Comma-separated context windows (default 0,1,8,32,128,512).")
@click.option("--typo-rate", type=float, default=None)
@click.option("--typo-ops", type=str, default=None)
@click.option("--target", type=str, default=None)
@_train_options
@_guard
def cmd_sweep(train_file, dev_file, test_file, windows, typo_rate, typo_ops, target,
              epochs, learning_rate, l2, batch_size, seed, config_file, out_dir) -> None:
    """Train once, then evaluate every context window on clean and noisy test."""
    settings = _Settings(config_file)
    train_config = _train_config(settings, epochs, learning_rate, l2, batch_size, seed)
    window_list = settings.get("windows", _parse_windows(windows) if windows else None,
                               DEFAULT_WINDOWS, _parse_windows)
    if any(w < 0 for w in window_list):
        raise CliUsageError(f"windows must be non-negative, got {window_list}")
    typo_config = _typo_config(settings, typo_rate, typo_ops, target, seed)
    directory = _out_dir(out_dir, "mica_sweep")

    train_corpus = _load_corpus(train_file)
    dev_corpus = _load_corpus(dev_file)
    test_corpus = _load_corpus(test_file)
    noisy_corpus, log = inject(test_corpus, typo_config)
    dump_conll(noisy_corpus, directory / "test_typos.conll", "gold")
    (directory / "typo_log.csv").write_text(corruption_log_csv(log), encoding="utf-8")

    click.echo("training baseline (pass 1)...")
    pass1 = pipeline.train_first_pass(train_corpus, train_config)
    crf.save_model(pass1, directory / "pass1.crf")
    click.echo(f"baseline dev F1 = {100 * _dev_f1(lambda c: pipeline.predict_corpus(pass1, c), dev_corpus):.2f}")

    # Pass-1 predictions are computed once and reused for every window: the
    # dictionaries are the only thing the window changes.
    train_preds = pipeline.predict_corpus(pass1, train_corpus)
    clean_preds = pipeline.predict_corpus(pass1, test_corpus)
    noisy_preds = pipeline.predict_corpus(pass1, noisy_corpus)
    dump_conll(train_corpus.with_predicted(train_preds), directory / "train_pass1.conll", "predicted")
    dump_conll(test_corpus.with_predicted(clean_preds), directory / "test_pass1.conll", "predicted")

    def evaluated(gold: Corpus, predictions) -> EvalReport:
        return score(gold, gold.with_predicted(predictions))

    rows = [
        SweepRow("crf", 0, evaluated(test_corpus, clean_preds)),
        SweepRow("crf+typos", 0, evaluated(noisy_corpus, noisy_preds)),
    ]
    for context_window in window_list:
        click.echo(f"training pass 2, window {context_window}...")
        context = ContextConfig(window=context_window)
        pass2 = pipeline.train_second_pass(train_corpus, train_preds, context, train_config)
        crf.save_model(pass2, directory / f"pass2_w{context_window}.crf")
        clean = pipeline.two_pass_predict_corpus(test_corpus, pass1, pass2, context, clean_preds)
        noisy = pipeline.two_pass_predict_corpus(noisy_corpus, pass1, pass2, context, noisy_preds)
        dump_conll(test_corpus.with_predicted(clean),
                   directory / f"test_mica_w{context_window}.conll", "predicted")
        dump_conll(noisy_corpus.with_predicted(noisy),
                   directory / f"test_mica_typos_w{context_window}.conll", "predicted")
        rows.append(SweepRow("mica", context_window, evaluated(test_corpus, clean)))
        rows.append(SweepRow("mica+typos", context_window, evaluated(noisy_corpus, noisy)))

    tables = sweep_report(rows)
    (directory / "sweep.csv").write_text(tables.csv, encoding="utf-8")
    (directory / "sweep.txt").write_text(tables.table, encoding="utf-8")
    settings.write_resolved(directory, {"command": "sweep", "train_file": train_file,
                                        "dev_file": dev_file, "test_file": test_file})
    click.echo(tables.table, nl=False)


@main.command("generate")
@click.argument("out_dir")
@click.option("--train-docs", type=int, default=140, show_default=True)
@click.option("--dev-docs", type=int, default=20, show_default=True)
@click.option("--test-docs", type=int, default=60, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_guard
def cmd_generate(out_dir, train_docs, dev_docs, test_docs, seed) -> None:
    """Write a synthetic court-style train/dev/test benchmark."""
    if min(train_docs, dev_docs, test_docs) < 0:
        raise CliUsageError("document counts must be non-negative")
    rng = random.Random(seed)
    directory = _out_dir(out_dir, out_dir)
    for name, count in (("train", train_docs), ("dev", dev_docs), ("test", test_docs)):
        corpus = generate_corpus(count, rng=rng)
        dump_conll(corpus, directory / f"{name}.conll", "gold")
        click.echo(f"{name}.conll: {count} documents, {sum(len(d) for d in corpus.documents)} sentences")


if __name__ == "__main__":
    main()
