"""Command-line entry point.

Every command reads a plain ``key = value`` config file (``-c``) and
accepts repeatable ``--set key=value`` overrides; the merged config is
echoed into a ``<output>.provenance.json`` record together with input
hashes, the seed, and the toolkit version. Exit codes: 0 on success, 1
for validation/config problems, 2 for runtime or numeric failures.
"""

from __future__ import annotations

import json
import sys
import traceback
from pathlib import Path

import click

from . import config as cfg
from ._version import VERSION
from .ablation import VARIANTS, AblationConfig, AblationResources, run_ablation
from .conll import (
    ENTITY_TYPES,
    SCHEMA_BIO,
    SCHEMA_BIOSE,
    Corpus,
    Sentence,
    Token,
    convert_schema,
    filter_tags,
    normalize_tokens,
    parse_conll,
    serialize_conll,
)
from .embeddings import (
    apply_alignment,
    load_embeddings,
    load_word_pairs,
    merge_tables,
    normalize_table,
    oov_rate,
    procrustes_align,
    save_embeddings,
)
from .errors import ConfigError, ValidationError, XlnerError
from .metrics import score_report
from .romanize import (
    BUILTIN_LANGUAGES,
    builtin_table,
    load_table,
    romanize_corpus,
    romanize_with_count,
)
from .tagger import BilstmCrfTagger
from .translate import load_dictionary, translate_corpus


def config_options(fn):
    fn = click.option(
        "--set",
        "overrides",
        multiple=True,
        metavar="KEY=VALUE",
        help="Override a config value (repeatable).",
    )(fn)
    fn = click.option(
        "-c",
        "--config",
        "config_path",
        type=click.Path(),
        default=None,
        help="Path to a key = value config file.",
    )(fn)
    return fn


def effective_config(config_path, overrides) -> dict[str, str]:
    conf = cfg.load_config(config_path) if config_path else {}
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        conf[key] = value.strip()
    return conf


def _read_corpus(path: Path, schema: str, language: str = "und") -> Corpus:
    with open(path, encoding="utf-8") as handle:
        return parse_conll(handle, language=language, schema=schema)


def _read_embeddings(path: Path):
    with open(path, encoding="utf-8") as handle:
        return load_embeddings(handle)


def _romanization_from_config(conf: dict[str, str]):
    """None when unset; a builtin language name or a table file path."""
    value = conf.get("romanization", "")
    if not value:
        return None
    if value in BUILTIN_LANGUAGES:
        return builtin_table(value)
    path = Path(value)
    if not path.exists():
        raise ConfigError(
            f"config key 'romanization': no builtin language or file named {value!r}"
        )
    with open(path, encoding="utf-8") as handle:
        return load_table(handle, language=path.stem)


def _schema(conf: dict[str, str], key: str, default: str) -> str:
    value = conf.get(key, default)
    if value not in (SCHEMA_BIO, SCHEMA_BIOSE):
        raise ConfigError(
            f"config key {key!r} must be {SCHEMA_BIO} or {SCHEMA_BIOSE}, got {value!r}"
        )
    return value


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _relabeled(corpus: Corpus, labels: list[list[str]]) -> Corpus:
    sentences = tuple(
        Sentence(tuple(Token(t.surface, lab) for t, lab in zip(s.tokens, row)))
        for s, row in zip(corpus.sentences, labels)
    )
    return Corpus(sentences, language=corpus.language, schema=corpus.schema)


@click.group()
@click.version_option(VERSION, prog_name="xlner")
def cli():
    """Cross-lingual NER: train on one language, tag another."""


# ----------------------------------------------------------------------


@cli.command()
@config_options
def preprocess(config_path, overrides):
    """Normalize a CoNLL corpus and convert it to the four-boundary schema."""
    conf = effective_config(config_path, overrides)
    input_path = cfg.get_path(conf, "input")
    output = Path(cfg.require(conf, "output"))
    schema_in = _schema(conf, "input_schema", SCHEMA_BIO)
    keep = [
        t.strip()
        for t in conf.get("keep_types", ",".join(ENTITY_TYPES)).split(",")
        if t.strip()
    ]
    corpus = _read_corpus(input_path, schema_in, conf.get("language", "und"))
    if not corpus.sentences:
        raise ValidationError(f"input corpus {input_path} contains no sentences")
    corpus = filter_tags(corpus, keep)
    corpus = normalize_tokens(corpus)
    corpus = convert_schema(corpus, SCHEMA_BIOSE)
    _write_text(output, serialize_conll(corpus))
    record = cfg.provenance_record(
        "preprocess", conf, inputs={"input": input_path}, outputs=[output.name]
    )
    cfg.write_provenance(record, output)
    click.echo(f"wrote {len(corpus.sentences)} sentences to {output}")


@cli.command()
@config_options
def align(config_path, overrides):
    """Map target embeddings into the source space and merge the tables."""
    conf = effective_config(config_path, overrides)
    source_path = cfg.get_path(conf, "source_embeddings")
    target_path = cfg.get_path(conf, "target_embeddings")
    pairs_path = cfg.get_path(conf, "seed_dictionary")
    output = Path(cfg.require(conf, "output"))

    source = normalize_table(_read_embeddings(source_path))
    target = normalize_table(_read_embeddings(target_path))
    with open(pairs_path, encoding="utf-8") as handle:
        pairs = load_word_pairs(handle)
    omap = procrustes_align(source, target, pairs)
    merged, collisions = merge_tables(source, apply_alignment(target, omap))
    output.parent.mkdir(parents=True, exist_ok=True)
    with open(output, "w", encoding="utf-8") as handle:
        save_embeddings(merged, handle)
    record = cfg.provenance_record(
        "align",
        conf,
        inputs={
            "source_embeddings": source_path,
            "target_embeddings": target_path,
            "seed_dictionary": pairs_path,
        },
        outputs=[output.name],
    )
    record["collisions"] = collisions
    record["merged_words"] = len(merged.vectors)
    cfg.write_provenance(record, output)
    click.echo(
        f"merged {len(merged.vectors)} words into {output} "
        f"({collisions} collisions kept the source vector)"
    )


@cli.command()
@config_options
def translate(config_path, overrides):
    """Rewrite training tokens through a bilingual dictionary."""
    conf = effective_config(config_path, overrides)
    input_path = cfg.get_path(conf, "input")
    dict_path = cfg.get_path(conf, "dictionary")
    emb_path = cfg.get_path(conf, "embeddings")
    output = Path(cfg.require(conf, "output"))
    alpha = cfg.get_float(conf, "alpha", 0.5)

    corpus = _read_corpus(input_path, _schema(conf, "input_schema", SCHEMA_BIOSE))
    with open(dict_path, encoding="utf-8") as handle:
        dictionary = load_dictionary(handle)
    table = _read_embeddings(emb_path)
    translated, stats = translate_corpus(corpus, dictionary, table, alpha)
    _write_text(output, serialize_conll(translated))
    record = cfg.provenance_record(
        "translate",
        conf,
        inputs={"input": input_path, "dictionary": dict_path, "embeddings": emb_path},
        outputs=[output.name],
    )
    record["stats"] = stats.as_record()
    cfg.write_provenance(record, output)
    click.echo(
        f"replaced {stats.replaced} of {stats.total} tokens "
        f"({stats.kept} kept); wrote {output}"
    )


@cli.command()
@config_options
@click.option("-w", "--word", default=None, help="Romanize one word and exit.")
def romanize(config_path, overrides, word):
    """Rewrite surfaces into ASCII via a transliteration table."""
    conf = effective_config(config_path, overrides)
    table = _romanization_from_config(conf)
    if table is None:
        raise ConfigError("config key 'romanization' is required for this command")
    unmatched = conf.get("unmatched", "")
    if word is not None:
        result, dropped = romanize_with_count(word, table, unmatched)
        click.echo(result)
        if dropped:
            click.echo(f"({dropped} character(s) had no rule)", err=True)
        return
    input_path = cfg.get_path(conf, "input")
    output = Path(cfg.require(conf, "output"))
    corpus = _read_corpus(input_path, _schema(conf, "input_schema", SCHEMA_BIOSE))
    romanized = romanize_corpus(corpus, table, unmatched)
    rewritten = Corpus(
        tuple(
            Sentence(
                tuple(
                    Token(surface, token.label)
                    for surface, token in zip(row, sentence.tokens)
                )
            )
            for row, sentence in zip(romanized.sentences, corpus.sentences)
        ),
        language=corpus.language,
        schema=corpus.schema,
    )
    _write_text(output, serialize_conll(rewritten))
    record = cfg.provenance_record(
        "romanize", conf, inputs={"input": input_path}, outputs=[output.name]
    )
    record["unmatched_characters"] = romanized.dropped
    cfg.write_provenance(record, output)
    click.echo(
        f"wrote {output} ({romanized.dropped} characters had no rule)"
    )


@cli.command()
@config_options
@click.option("-v", "--verbose", is_flag=True, help="Print per-epoch progress.")
def train(config_path, overrides, verbose):
    """Train a tagger; writes the model file and a training report."""
    conf = effective_config(config_path, overrides)
    hyper = cfg.hyperparams_from_config(conf)
    train_path = cfg.get_path(conf, "train")
    if "dev" not in conf or not conf["dev"]:
        raise ConfigError("config key 'dev' is required: training selects the best epoch on it")
    dev_path = cfg.get_path(conf, "dev")
    model_path = Path(cfg.require(conf, "model"))
    schema = _schema(conf, "input_schema", SCHEMA_BIOSE)
    train_corpus = _read_corpus(train_path, schema)
    dev_corpus = _read_corpus(dev_path, schema)

    emb_path = None
    table = None
    if hyper.input_mode != "char_only":
        emb_path = cfg.get_path(conf, "embeddings")
        table = _read_embeddings(emb_path)
    roman = _romanization_from_config(conf)

    tagger = BilstmCrfTagger(
        word_vectors=table,
        romanization=roman,
        word_dim=hyper.word_dim,
        char_dim=hyper.char_dim,
        char_hidden=hyper.char_hidden,
        token_hidden=hyper.token_hidden,
        dropout=hyper.dropout,
        epochs=hyper.epochs,
        learning_rate=hyper.learning_rate,
        decay_rate=hyper.decay_rate,
        momentum=hyper.momentum,
        grad_clip=hyper.grad_clip,
        input_mode=hyper.input_mode,
        seed=hyper.seed,
        early_stop_f1=cfg.get_float(conf, "early_stop_f1"),
        verbose=verbose,
    )
    tagger.fit(
        [s.surfaces for s in train_corpus.sentences],
        [s.labels for s in train_corpus.sentences],
        [s.surfaces for s in dev_corpus.sentences],
        [s.labels for s in dev_corpus.sentences],
    )
    model_path.parent.mkdir(parents=True, exist_ok=True)
    tagger.save(model_path)
    report = tagger.train_report_
    _write_text(Path(str(model_path) + ".report.txt"), report.as_text() + "\n")
    _write_text(
        Path(str(model_path) + ".report.json"),
        json.dumps(report.as_record(), sort_keys=True, indent=2) + "\n",
    )
    inputs = {"train": train_path, "dev": dev_path}
    if emb_path is not None:
        inputs["embeddings"] = emb_path
    record = cfg.provenance_record(
        "train", conf, inputs=inputs, outputs=[model_path.name], seed=hyper.seed
    )
    record["model_checksum"] = report.final_checksum
    cfg.write_provenance(record, model_path)
    click.echo(
        f"saved {model_path}; best dev F1 {report.best_dev_f1:.4f} "
        f"at epoch {report.selected_epoch}"
    )


def _load_tagger(conf: dict[str, str]) -> tuple[BilstmCrfTagger, dict[str, Path]]:
    model_path = cfg.get_path(conf, "model")
    inputs: dict[str, Path] = {"model": model_path}
    table = None
    emb_path = cfg.get_path(conf, "embeddings", required=False)
    if emb_path is not None:
        table = _read_embeddings(emb_path)
        inputs["embeddings"] = emb_path
    roman = _romanization_from_config(conf)
    tagger = BilstmCrfTagger.load(model_path, word_vectors=table, romanization=roman)
    return tagger, inputs


@cli.command()
@config_options
def predict(config_path, overrides):
    """Tag a corpus with a trained model (input labels are ignored)."""
    conf = effective_config(config_path, overrides)
    tagger, inputs = _load_tagger(conf)
    input_path = cfg.get_path(conf, "input")
    inputs["input"] = input_path
    output = Path(cfg.require(conf, "output"))
    corpus = _read_corpus(input_path, _schema(conf, "input_schema", SCHEMA_BIOSE))
    labels = tagger.predict([s.surfaces for s in corpus.sentences])
    _write_text(output, serialize_conll(_relabeled(corpus, labels)))
    record = cfg.provenance_record(
        "predict", conf, inputs=inputs, outputs=[output.name]
    )
    cfg.write_provenance(record, output)
    click.echo(f"wrote predictions for {len(labels)} sentences to {output}")


@cli.command()
@config_options
def evaluate(config_path, overrides):
    """Score a model: overall and per-length F1, plus OOV rates."""
    conf = effective_config(config_path, overrides)
    tagger, inputs = _load_tagger(conf)
    test_path = cfg.get_path(conf, "test")
    inputs["test"] = test_path
    gold = _read_corpus(test_path, _schema(conf, "input_schema", SCHEMA_BIOSE))
    if not gold.sentences:
        raise ValidationError(f"test corpus {test_path} contains no sentences")
    labels = tagger.predict([s.surfaces for s in gold.sentences])
    predicted = _relabeled(gold, labels)
    text = score_report(gold, predicted)
    if tagger.word_vectors is not None:
        report = oov_rate(gold, tagger.word_vectors)
        text += "\n\noov rates (%):\n" + report.as_text().rstrip("\n")
    text += "\n"
    click.echo(text, nl=False)
    report_path = conf.get("report")
    if report_path:
        out = Path(report_path)
        _write_text(out, text)
        record = cfg.provenance_record(
            "evaluate", conf, inputs=inputs, outputs=[out.name]
        )
        cfg.write_provenance(record, out)


@cli.command()
@config_options
@click.option("-v", "--verbose", is_flag=True, help="Print per-epoch progress.")
def ablate(config_path, overrides, verbose):
    """Train and score the ablation variants on a shared seed."""
    conf = effective_config(config_path, overrides)
    hyper = cfg.hyperparams_from_config(conf)
    train_path = cfg.get_path(conf, "train")
    dev_path = cfg.get_path(conf, "dev")
    test_path = cfg.get_path(conf, "test")
    emb_path = cfg.get_path(conf, "embeddings")
    output = Path(cfg.require(conf, "output"))
    schema = _schema(conf, "input_schema", SCHEMA_BIOSE)

    variant_list = [
        v.strip()
        for v in conf.get("variants", ",".join(VARIANTS)).split(",")
        if v.strip()
    ]
    configs = [AblationConfig(v, hyper.seed, hyper) for v in variant_list]

    inputs = {"train": train_path, "dev": dev_path, "test": test_path, "embeddings": emb_path}
    dictionary = None
    dict_path = cfg.get_path(conf, "dictionary", required=False)
    if dict_path is not None:
        with open(dict_path, encoding="utf-8") as handle:
            dictionary = load_dictionary(handle)
        inputs["dictionary"] = dict_path
    resources = AblationResources(
        word_vectors=_read_embeddings(emb_path),
        dictionary=dictionary,
        romanization=_romanization_from_config(conf),
        alpha=cfg.get_float(conf, "alpha", 0.5),
        early_stop_f1=cfg.get_float(conf, "early_stop_f1"),
        verbose=verbose,
    )
    table = run_ablation(
        _read_corpus(train_path, schema),
        _read_corpus(dev_path, schema),
        _read_corpus(test_path, schema),
        configs,
        resources,
    )
    _write_text(output, table.as_text() + "\n")
    _write_text(
        Path(str(output) + ".json"),
        json.dumps(table.as_record(), sort_keys=True, indent=2) + "\n",
    )
    record = cfg.provenance_record(
        "ablate", conf, inputs=inputs, outputs=[output.name], seed=hyper.seed
    )
    cfg.write_provenance(record, output)
    click.echo(table.as_text())


@cli.command("oov-report")
@config_options
def oov_report(config_path, overrides):
    """Out-of-vocabulary type and token rates of a corpus vs. a table."""
    conf = effective_config(config_path, overrides)
    input_path = cfg.get_path(conf, "input")
    emb_path = cfg.get_path(conf, "embeddings")
    corpus = _read_corpus(input_path, _schema(conf, "input_schema", SCHEMA_BIOSE))
    report = oov_rate(corpus, _read_embeddings(emb_path))
    click.echo(report.as_text(), nl=False)
    output = conf.get("output")
    if output:
        out = Path(output)
        _write_text(out, report.as_text())
        record = cfg.provenance_record(
            "oov-report",
            conf,
            inputs={"input": input_path, "embeddings": emb_path},
            outputs=[out.name],
        )
        cfg.write_provenance(record, out)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except ValidationError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except XlnerError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except Exception:
        traceback.print_exc()
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
