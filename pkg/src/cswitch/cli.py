"""Command-line pipeline driver.

Every subcommand reads/writes the plain-text, TSV, Pharaoh, and model file
formats defined by the library modules, and writes a manifest JSON next to
its primary output so runs can be replayed byte-for-byte.

A JSON config file (``--config``) may hold per-subcommand sections; command
line flags override config values.
"""

from __future__ import annotations

import functools
import json
import sys

import click
import numpy as np

from . import align, corpus, generate, metrics, objectives, subword, units as units_mod
from .runutil import ordered_map, write_manifest


def _fail(message: str, **details):
    payload = {"error": message}
    payload.update(details)
    click.echo(json.dumps(payload), err=True)
    sys.exit(1)


def runtime_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (
            corpus.CorpusError,
            subword.BpeError,
            align.AlignError,
            generate.GenerateError,
            metrics.MetricsError,
            objectives.ObjectiveError,
            objectives.DivergenceError,
            OSError,
        ) as exc:
            _fail(str(exc), type=type(exc).__name__)

    return wrapper


def apply_config(ctx: click.Context, section: str):
    """Fill parameters from the config file where the command line left the
    default; explicit flags win."""
    cfg = (ctx.obj or {}).get("config", {}).get(section, {})
    for name, value in cfg.items():
        if name not in ctx.params:
            _fail(f"unknown config key {name!r} in section {section!r}")
        if ctx.get_parameter_source(name) == click.core.ParameterSource.DEFAULT:
            ctx.params[name] = value
    return ctx.params


def emit_manifest(out_path, subcommand, inputs, config):
    write_manifest(str(out_path) + ".manifest.json", subcommand, inputs, config)


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON file with per-subcommand option sections.")
@click.option("--workers", type=int, default=1, show_default=True,
              help="Worker count; outputs do not depend on it.")
@click.pass_context
def main(ctx, config_path, workers):
    """Code-switched corpus generation and alignment-objective toolkit."""
    ctx.ensure_object(dict)
    ctx.obj["workers"] = workers
    if config_path:
        with open(config_path, encoding="utf-8") as fh:
            ctx.obj["config"] = json.load(fh)
    else:
        ctx.obj["config"] = {}


def _read_corpus(src, tgt, src_lang, tgt_lang):
    return corpus.read_parallel(src, tgt, src_lang, tgt_lang)


@main.command()
@click.option("--src", required=True, type=click.Path(exists=True))
@click.option("--tgt", required=True, type=click.Path(exists=True))
@click.option("--src-lang", default="en", show_default=True)
@click.option("--tgt-lang", default="fr", show_default=True)
@click.option("--min-len", type=int, default=2, show_default=True)
@click.option("--max-len", type=int, default=250, show_default=True)
@click.option("--out-src", required=True, type=click.Path())
@click.option("--out-tgt", required=True, type=click.Path())
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.pass_context
@runtime_errors
def clean(ctx, src, tgt, src_lang, tgt_lang, min_len, max_len, out_src, out_tgt, report_path):
    """Drop sentence pairs violating the length bounds."""
    p = apply_config(ctx, "clean")
    policy = corpus.CleaningPolicy(min_len=p["min_len"], max_len=p["max_len"])
    pairs = _read_corpus(p["src"], p["tgt"], p["src_lang"], p["tgt_lang"])
    rep = corpus.CleaningReport()
    kept = list(corpus.clean_corpus(pairs, policy, rep))
    corpus.write_lines(p["out_src"], (pr.source.text for pr in kept))
    corpus.write_lines(p["out_tgt"], (pr.target.text for pr in kept))
    if p["report_path"]:
        with open(p["report_path"], "w", encoding="utf-8") as fh:
            fh.write(json.dumps(rep.as_dict()) + "\n")
    emit_manifest(p["out_src"], "clean", [p["src"], p["tgt"]],
                  {k: v for k, v in p.items() if isinstance(v, (str, int, float, bool, type(None)))})
    click.echo(json.dumps(rep.as_dict()))


@main.command()
@click.option("--src", required=True, type=click.Path(exists=True))
@click.option("--tgt", required=True, type=click.Path(exists=True))
@click.option("--src-lang", default="en", show_default=True)
@click.option("--tgt-lang", default="fr", show_default=True)
@click.option("--target-lang", required=True, help="Language the tag points at.")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_context
@runtime_errors
def tag(ctx, src, tgt, src_lang, tgt_lang, target_lang, out_path):
    """Prepend the target-language tag; writes a TSV corpus."""
    p = apply_config(ctx, "tag")
    pairs = _read_corpus(p["src"], p["tgt"], p["src_lang"], p["tgt_lang"])
    known = [p["src_lang"], p["tgt_lang"]]
    tagged = [corpus.prepend_tag(pair, p["target_lang"], known) for pair in pairs]
    corpus.write_tsv(p["out_path"], tagged)
    emit_manifest(p["out_path"], "tag", [p["src"], p["tgt"]], dict(p))


@main.command()
@click.option("--a", "a_path", required=True, type=click.Path(exists=True))
@click.option("--b", "b_path", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, required=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_context
@runtime_errors
def mix(ctx, a_path, b_path, seed, out_path):
    """Concatenate two TSV corpora and shuffle with a seed."""
    p = apply_config(ctx, "mix")
    a = corpus.read_lines(p["a_path"])
    b = corpus.read_lines(p["b_path"])
    corpus.write_lines(p["out_path"], corpus.mix_corpora(a, b, p["seed"]))
    emit_manifest(p["out_path"], "mix", [p["a_path"], p["b_path"]], dict(p))


@main.command("bpe-learn")
@click.option("--input", "inputs", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--merges", "merge_count", type=int, default=500, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_context
@runtime_errors
def bpe_learn(ctx, inputs, merge_count, out_path):
    """Learn a shared BPE model over all input text files."""
    p = apply_config(ctx, "bpe-learn")
    sentences = []
    for path in p["inputs"]:
        for line in corpus.read_lines(path):
            sentences.append(corpus.Sentence(tuple(line.split()), "any"))
    enc = subword.BpeEncoder(merge_count=p["merge_count"]).fit(sentences)
    enc.save(p["out_path"])
    emit_manifest(p["out_path"], "bpe-learn", list(p["inputs"]),
                  {"merge_count": p["merge_count"]})


@main.command("bpe-apply")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--input", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--reverse", is_flag=True, help="Undo segmentation instead.")
@click.pass_context
@runtime_errors
def bpe_apply(ctx, model_path, in_path, out_path, reverse):
    """Apply (or reverse) BPE segmentation line by line."""
    p = apply_config(ctx, "bpe-apply")
    lines = corpus.read_lines(p["in_path"])
    if p["reverse"]:
        out = [subword.remove_bpe(corpus.Sentence(tuple(l.split()), "any")).text for l in lines]
    else:
        enc = subword.BpeEncoder.load(p["model_path"])
        out = [enc.transform_sentence(corpus.Sentence(tuple(l.split()), "any")).text for l in lines]
    corpus.write_lines(p["out_path"], out)
    emit_manifest(p["out_path"], "bpe-apply", [p["model_path"], p["in_path"]],
                  {"reverse": p["reverse"]})


@main.command("align-train")
@click.option("--src", required=True, type=click.Path(exists=True))
@click.option("--tgt", required=True, type=click.Path(exists=True))
@click.option("--src-lang", default="en", show_default=True)
@click.option("--tgt-lang", default="fr", show_default=True)
@click.option("--model1-iterations", type=int, default=5, show_default=True)
@click.option("--iterations", type=int, default=5, show_default=True)
@click.option("--tension", type=float, default=4.0, show_default=True)
@click.option("--null-prob", type=float, default=0.08, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_context
@runtime_errors
def align_train(ctx, src, tgt, src_lang, tgt_lang, model1_iterations, iterations,
                tension, null_prob, out_path):
    """Train the diagonal alignment model (src -> tgt direction)."""
    p = apply_config(ctx, "align-train")
    pairs = _read_corpus(p["src"], p["tgt"], p["src_lang"], p["tgt_lang"])
    model = align.DiagonalAligner(
        model1_iterations=p["model1_iterations"],
        iterations=p["iterations"],
        tension=p["tension"],
        null_prob=p["null_prob"],
    ).fit(pairs)
    model.save_ttable(p["out_path"])
    emit_manifest(p["out_path"], "align-train", [p["src"], p["tgt"]],
                  {k: p[k] for k in ("model1_iterations", "iterations", "tension", "null_prob")})
    click.echo(json.dumps({"log_likelihoods": model.trace_.log_likelihoods}))


@main.command("align-decode")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--src", required=True, type=click.Path(exists=True))
@click.option("--tgt", required=True, type=click.Path(exists=True))
@click.option("--src-lang", default="en", show_default=True)
@click.option("--tgt-lang", default="fr", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_context
@runtime_errors
def align_decode(ctx, model_path, src, tgt, src_lang, tgt_lang, out_path):
    """Viterbi-decode alignments to Pharaoh format."""
    p = apply_config(ctx, "align-decode")
    model = align.DiagonalAligner.load_ttable(p["model_path"])
    pairs = _read_corpus(p["src"], p["tgt"], p["src_lang"], p["tgt_lang"])
    links = ordered_map(model.predict_pair, pairs, ctx.obj["workers"])
    corpus.write_lines(p["out_path"], (ls.to_pharaoh() for ls in links))
    emit_manifest(p["out_path"], "align-decode", [p["model_path"], p["src"], p["tgt"]], {})


@main.command()
@click.option("--fwd", required=True, type=click.Path(exists=True),
              help="Pharaoh links, src->tgt decode.")
@click.option("--rev", required=True, type=click.Path(exists=True),
              help="Pharaoh links, tgt->src decode.")
@click.option("--src", required=True, type=click.Path(exists=True))
@click.option("--tgt", required=True, type=click.Path(exists=True))
@click.option("--heuristic", type=click.Choice(["intersection", "union", "gdfa"]),
              default="gdfa", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_context
@runtime_errors
def symmetrize(ctx, fwd, rev, src, tgt, heuristic, out_path):
    """Combine forward and reverse alignments."""
    p = apply_config(ctx, "symmetrize")
    src_lines = corpus.read_lines(p["src"])
    tgt_lines = corpus.read_lines(p["tgt"])
    fwd_lines = corpus.read_lines(p["fwd"])
    rev_lines = corpus.read_lines(p["rev"])
    if not (len(src_lines) == len(tgt_lines) == len(fwd_lines) == len(rev_lines)):
        _fail("corpus and alignment files differ in length")
    out = []
    for s, t, f, r in zip(src_lines, tgt_lines, fwd_lines, rev_lines):
        n, m = len(s.split()), len(t.split())
        combined = align.symmetrize(
            align.parse_pharaoh(f, n, m),
            align.parse_pharaoh(r, m, n),
            p["heuristic"],
        )
        out.append(combined.to_pharaoh())
    corpus.write_lines(p["out_path"], out)
    emit_manifest(p["out_path"], "symmetrize",
                  [p["fwd"], p["rev"], p["src"], p["tgt"]], {"heuristic": p["heuristic"]})


@main.command("units")
@click.option("--src", required=True, type=click.Path(exists=True))
@click.option("--tgt", required=True, type=click.Path(exists=True))
@click.option("--alignments", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_context
@runtime_errors
def units_cmd(ctx, src, tgt, alignments, out_path):
    """Extract minimal aligned units per line."""
    p = apply_config(ctx, "units")
    src_lines = corpus.read_lines(p["src"])
    tgt_lines = corpus.read_lines(p["tgt"])
    link_lines = corpus.read_lines(p["alignments"])
    if not (len(src_lines) == len(tgt_lines) == len(link_lines)):
        _fail("corpus and alignment files differ in length")
    out = []
    for s, t, a in zip(src_lines, tgt_lines, link_lines):
        links = align.parse_pharaoh(a, len(s.split()), len(t.split()))
        out.append(units_mod.format_units(units_mod.extract_units(links)))
    corpus.write_lines(p["out_path"], out)
    emit_manifest(p["out_path"], "units", [p["src"], p["tgt"], p["alignments"]], {})


@main.command()
@click.option("--src", required=True, type=click.Path(exists=True))
@click.option("--tgt", required=True, type=click.Path(exists=True))
@click.option("--src-lang", default="en", show_default=True)
@click.option("--tgt-lang", default="fr", show_default=True)
@click.option("--units", "units_path", required=True, type=click.Path(exists=True))
@click.option("--alignments", type=click.Path(exists=True), default=None,
              help="Optional Pharaoh file for unit link counts.")
@click.option("--mode", type=click.Choice(["mlm_fraction", "exponential"]),
              default="mlm_fraction", show_default=True)
@click.option("--fraction", type=float, default=0.15, show_default=True)
@click.option("--short-threshold", type=int, default=7, show_default=True)
@click.option("--max-replacements", type=int, default=4, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--ratio-max", type=float, default=1.5, show_default=True)
@click.option("--max-len", type=int, default=250, show_default=True)
@click.option("--forced-units", default=None,
              help="Comma-separated unit indices, replacing random selection (debug).")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.pass_context
@runtime_errors
def generate_cmd(ctx, src, tgt, src_lang, tgt_lang, units_path, alignments, mode,
                 fraction, short_threshold, max_replacements, seed, ratio_max,
                 max_len, forced_units, out_path, report_path):
    """Generate code-switched rows (two tagged rows per record)."""
    p = apply_config(ctx, "generate")
    pairs = _read_corpus(p["src"], p["tgt"], p["src_lang"], p["tgt_lang"])
    unit_lines = corpus.read_lines(p["units_path"])
    if len(unit_lines) != len(pairs):
        _fail("units file and corpus differ in length")
    unit_lists = [units_mod.parse_units(line) for line in unit_lines]
    policy = generate.ReplacementPolicy(
        mode=p["mode"],
        fraction=p["fraction"],
        short_threshold=p["short_threshold"],
        max_replacements=p["max_replacements"],
        seed=p["seed"],
    )

    if p["forced_units"] is not None:
        forced = [int(x) for x in str(p["forced_units"]).split(",") if x != ""]
        records = []
        for idx, (pair, units) in enumerate(zip(pairs, unit_lists)):
            rng = corpus.per_line_rng(policy.seed, idx)
            matrix = generate.choose_matrix(pair, rng)
            records.append(generate.apply_replacements(pair, units, forced, matrix))
        report = generate.GenerationReport(records=len(records))
    else:
        report = generate.GenerationReport()
        workers = ctx.obj["workers"]
        if workers > 1:
            tasks = list(enumerate(zip(pairs, unit_lists)))
            records = ordered_map(
                functools.partial(_generate_one, policy=policy), tasks, workers
            )
            for rec, units in zip(records, unit_lists):
                report.records += 1
                if not units:
                    report.zero_unit_sentences += 1
                report.fraction_values.append(rec.replaced_fraction)
        else:
            records = generate.generate_corpus(pairs, unit_lists, policy, report)

    rows = []
    for rec in records:
        rows.extend(generate.emit_rows(rec))
    report.rows_emitted = len(rows)
    kept = generate.postfilter(rows, p["ratio_max"], p["max_len"])
    report.rows_kept = len(kept)
    corpus.write_lines(p["out_path"], (f"{s}\t{t}" for s, t in kept))
    if p["report_path"]:
        payload = report.as_dict()
        hist = metrics.build_histogram(report.fraction_values, 0.05) if report.fraction_values else None
        if hist:
            payload["fraction_histogram"] = {"edges": hist.edges, "counts": hist.counts}
        with open(p["report_path"], "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    emit_manifest(p["out_path"], "generate", [p["src"], p["tgt"], p["units_path"]],
                  {k: p[k] for k in ("mode", "fraction", "short_threshold",
                                     "max_replacements", "seed", "ratio_max", "max_len")})


def _generate_one(task, policy):
    idx, (pair, units) = task
    return generate.generate_record(pair, units, policy, idx)


@main.command()
@click.option("--input", "in_path", required=True, type=click.Path(exists=True),
              help="Plain text corpus (one sentence per line).")
@click.option("--bin-width", type=int, default=1, show_default=True)
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--svg", is_flag=True)
@click.pass_context
@runtime_errors
def stats(ctx, in_path, bin_width, out_dir, svg):
    """Write the sentence-length histogram report."""
    p = apply_config(ctx, "stats")
    sentences = [corpus.Sentence(tuple(l.split()), "any") for l in corpus.read_lines(p["in_path"])]
    writer = metrics.ReportWriter(p["out_dir"], svg=p["svg"])
    writer.write_histogram("length", metrics.length_histogram(sentences, p["bin_width"]))
    emit_manifest(writer.written[0], "stats", [p["in_path"]], {"bin_width": p["bin_width"]})
    click.echo(json.dumps({"written": writer.written}))


@main.command()
@click.option("--hyp", required=True, type=click.Path(exists=True))
@click.option("--ref", required=True, type=click.Path(exists=True))
@click.option("--max-ngram", type=int, default=4, show_default=True)
@click.option("--smoothing", type=click.Choice(["none", "exponential"]),
              default="none", show_default=True)
@click.option("--detok-lang", default=None,
              help="Score detokenized text, re-tokenizing with this language's rules.")
@click.option("--out-dir", type=click.Path(), default=None)
@click.pass_context
@runtime_errors
def bleu(ctx, hyp, ref, max_ngram, smoothing, detok_lang, out_dir):
    """Corpus BLEU of a hypothesis file against a reference file."""
    p = apply_config(ctx, "bleu")
    cfg = metrics.BleuConfig(max_ngram=p["max_ngram"], smoothing=p["smoothing"])
    hyp_lines = corpus.read_lines(p["hyp"])
    ref_lines = corpus.read_lines(p["ref"])
    if p["detok_lang"]:
        result = metrics.corpus_bleu_detok(hyp_lines, ref_lines, p["detok_lang"], cfg)
    else:
        result = metrics.corpus_bleu(
            [l.split() for l in hyp_lines], [l.split() for l in ref_lines], cfg
        )
    if p["out_dir"]:
        writer = metrics.ReportWriter(p["out_dir"])
        writer.write_bleu(result, cfg)
        emit_manifest(writer.written[0], "bleu", [p["hyp"], p["ref"]],
                      {"max_ngram": p["max_ngram"], "smoothing": p["smoothing"]})
    click.echo(json.dumps(result.as_dict()))


@main.command("obj-train")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True),
              help="TSV of sentence pairs (source tab target).")
@click.option("--kind", type=click.Choice(list(objectives.ObjectiveConfig.KINDS)),
              default="pool_cosine", show_default=True)
@click.option("--pooling", type=click.Choice(["max", "mean"]), default=None,
              help="Default: max for pool_cosine, mean otherwise.")
@click.option("--dim", type=int, default=8, show_default=True)
@click.option("--steps", type=int, default=500, show_default=True)
@click.option("--lr", type=float, default=0.1, show_default=True)
@click.option("--batch-size", type=int, default=8, show_default=True)
@click.option("--weight", type=float, default=None)
@click.option("--seed", type=int, required=True)
@click.option("--trace", "trace_path", required=True, type=click.Path())
@click.option("--checkpoint", "ckpt_path", type=click.Path(), default=None)
@click.pass_context
@runtime_errors
def obj_train(ctx, corpus_path, kind, pooling, dim, steps, lr, batch_size, weight,
              seed, trace_path, ckpt_path):
    """Train the toy encoder with one alignment objective."""
    p = apply_config(ctx, "obj-train")
    pairs = corpus.read_tsv(p["corpus_path"], "src", "tgt")
    config = objectives.ObjectiveConfig(kind=p["kind"], weight=p["weight"])
    pooling = p["pooling"] or ("max" if p["kind"] == "pool_cosine" else "mean")
    sentences = [s for pr in pairs for s in (pr.source, pr.target)]
    enc = objectives.ToyEncoder.from_corpus(sentences, d=p["dim"], pooling=pooling,
                                            seed=p["seed"])
    batch_pairs = [(pr.source, pr.target) for pr in pairs]
    if p["kind"] == "neg_margin":
        batch_pairs = [
            (x, y, batch_pairs[(i + 1) % len(batch_pairs)][1])
            for i, (x, y) in enumerate(batch_pairs)
        ]
    bs = p["batch_size"]
    batches = [batch_pairs[i : i + bs] for i in range(0, len(batch_pairs), bs)]
    batches = [b for b in batches if len(b) >= 2]
    trace = objectives.train_encoder(enc, batches, config, p["steps"], p["lr"])
    trace.write_csv(p["trace_path"])
    if p["ckpt_path"]:
        enc.save(p["ckpt_path"])
    emit_manifest(p["trace_path"], "obj-train", [p["corpus_path"]],
                  {k: p[k] for k in ("kind", "dim", "steps", "lr", "batch_size", "seed")})
    click.echo(json.dumps({"final_loss": trace.losses[-1]}))


@main.command("gradcheck")
@click.option("--kind", type=click.Choice(list(objectives.ObjectiveConfig.KINDS)),
              required=True)
@click.option("--batches", "n_batches", type=int, default=5, show_default=True)
@click.option("--batch-size", type=int, default=4, show_default=True)
@click.option("--dim", type=int, default=8, show_default=True)
@click.option("--vocab-size", type=int, default=50, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tolerance", type=float, default=1e-4, show_default=True)
@click.pass_context
@runtime_errors
def gradcheck_cmd(ctx, kind, n_batches, batch_size, dim, vocab_size, seed, tolerance):
    """Finite-difference check; exits 0 iff the max relative error passes."""
    p = apply_config(ctx, "gradcheck")
    from .gradcheck_harness import run_gradcheck_batches

    worst = run_gradcheck_batches(
        p["kind"], p["n_batches"], p["batch_size"], p["dim"], p["vocab_size"], p["seed"]
    )
    ok = bool(worst < p["tolerance"])
    click.echo(json.dumps({"kind": p["kind"], "max_rel_err": float(worst), "pass": ok}))
    if not ok:
        sys.exit(1)


if __name__ == "__main__":
    main()
