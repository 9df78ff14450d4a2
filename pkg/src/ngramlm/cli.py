"""Command-line entry point wiring the pipeline.

Subcommands are thin adapters over the library: vocab, count,
estimate, prune, interp, ppl, rescore, mert, wer, shard, serve-shard.
Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import arpa, counts, evaluate, lattice, model, prune, serve, tune, vocab
from .errors import LmError
from .io import open_text, read_sentences

BIND_ENV = "NGRAMLM_BIND"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _load_model(path: str) -> model.BackoffModel:
    return arpa.read_arpa(path)


def _load_models_maybe_mixture(paths, weights_arg):
    models = [_load_model(p) for p in paths]
    if len(models) == 1 and weights_arg is None:
        return models[0]
    if weights_arg is None:
        values = (1.0 / len(models),) * len(models)
    else:
        values = tuple(float(v) for v in weights_arg.split(","))
    wv = model.WeightVector(values=values, labels=tuple(f"lm{i}" for i in range(len(models))))
    return model.MixtureModel(components=models, weights=wv)


def _mapped_sentences(vocab_: vocab.Vocabulary, path: str):
    return [vocab.map_tokens(vocab_, s) for s in read_sentences(path)]


def _parse_weights(arg: str, labels) -> model.WeightVector:
    if "=" in arg:
        pairs = [item.split("=") for item in arg.split(",")]
        wmap = {k: float(v) for k, v in pairs}
        return model.WeightVector(
            values=tuple(wmap[lb] for lb in labels), labels=tuple(labels)
        )
    values = tuple(float(v) for v in arg.split(","))
    return model.WeightVector(values=values, labels=tuple(labels))


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

def _cmd_vocab(args) -> int:
    v = vocab.build_vocab(
        read_sentences(args.text),
        max_size=args.max_vocab,
        min_count=args.min_count,
    )
    vocab.write_vocab(v, args.out)
    print(f"words={len(v)}", file=sys.stderr)
    return 0


def _cmd_count(args) -> int:
    v = vocab.read_vocab(args.vocab)
    table = counts.count_ngrams(
        vocab.map_corpus(v, read_sentences(args.text)), args.order
    )
    counts.write_counts(table, args.out)
    for k, n in enumerate(table.per_order_counts(), start=1):
        print(f"order_{k}={n}", file=sys.stderr)
    return 0


def _cmd_estimate(args) -> int:
    v = vocab.read_vocab(args.vocab)
    raw = counts.read_counts(args.counts)
    adjusted = counts.adjust_counts_kn(raw)
    discounts = "auto" if args.discount == "auto" else [
        float(d) for d in args.discount.split(",")
    ]
    if isinstance(discounts, list) and len(discounts) == 1:
        discounts = discounts[0]
    m = model.estimate_kn(adjusted, v, discounts=discounts)
    arpa.write_arpa(m, args.out)
    for k, n in enumerate(m.per_order_counts(), start=1):
        print(f"order_{k}={n}", file=sys.stderr)
    return 0


def _cmd_prune(args) -> int:
    m = _load_model(args.model)
    before = m.per_order_counts()
    if args.target_size is not None:
        pruned, threshold = prune.prune_to_size(m, args.target_size)
    else:
        threshold = args.threshold
        pruned = prune.prune_entropy(m, threshold)
    arpa.write_arpa(pruned, args.out)
    after = pruned.per_order_counts()
    for k in range(1, m.order + 1):
        print(f"order_{k}_before={before[k - 1]}", file=sys.stderr)
        print(f"order_{k}_after={after[k - 1]}", file=sys.stderr)
    print(f"threshold={threshold:.17g}", file=sys.stderr)
    return 0


def _cmd_interp(args) -> int:
    models = [_load_model(p) for p in args.models]
    labels = tuple(f"lm{i}" for i in range(len(models)))
    if args.fit_heldout:
        v = models[0].vocab
        heldout = _mapped_sentences(v, args.fit_heldout)
        wv = model.fit_weights_em(
            models, heldout, max_iters=args.max_iters, tol=args.tol
        )
        for lb, value in zip(wv.labels, wv.values):
            print(f"{lb}\t{value:.6f}", file=sys.stderr)
    elif args.weights:
        wv = _parse_weights(args.weights, labels)
    else:
        wv = model.WeightVector.uniform(labels)
    merged = model.interpolate_static(models, wv)
    arpa.write_arpa(merged, args.out)
    return 0


def _cmd_ppl(args) -> int:
    m = _load_models_maybe_mixture(args.models, args.weights)
    v = m.vocab
    sentences = _mapped_sentences(v, args.text)
    report = evaluate.perplexity(m, sentences, count_end_symbol=not args.no_eos)
    if args.per_sentence:
        for i, s in enumerate(report.sentences):
            print(f"sent={i} tokens={s.tokens} logprob={s.log_prob:.6f}")
    print(f"ppl={report.ppl:.4f} tokens={report.token_count} oov={report.oov_count}")
    return 0


def _cmd_rescore(args) -> int:
    lat = lattice.read_lattice(args.lattice)
    if args.manifest:
        client = serve.DistributedClient.from_manifest(args.manifest)
        try:
            out = serve.rescore_remote(
                lat, client, lm_label=args.lm_label, order=args.order
            )
        finally:
            client.close()
    else:
        if not args.model:
            raise _UsageError("rescore needs a model path or --manifest")
        m = _load_model(args.model)
        out = lattice.rescore(lat, m, lm_label=args.lm_label, order=args.order)
    lattice.write_lattice(out, args.out)
    print(f"states={out.num_nodes} edges={len(out.edges)}", file=sys.stderr)
    return 0


def _cmd_mert(args) -> int:
    items = []
    labels = None
    with open_text(args.manifest) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            lat_path, _, ref_text = line.partition("\t")
            lat = lattice.read_lattice(lat_path)
            if labels is None:
                labels = lat.labels
            if args.vocab:
                v = vocab.read_vocab(args.vocab)
                ref = tuple(vocab.map_tokens(v, ref_text))
            else:
                ref = tuple(int(t) for t in ref_text.split())
            items.append((lat, ref))
    ts = tune.TuneSet(items=items)
    if args.init:
        init = _parse_weights(args.init, ts.labels)
    else:
        init = model.WeightVector.uniform(ts.labels)
    result = tune.mert(
        ts,
        init,
        max_rounds=args.rounds,
        nbest_size=args.nbest,
        random_directions=args.random_directions,
        seed=args.seed,
    )
    for i, wer in enumerate(result.wer_trace):
        print(f"round={i} wer={wer:.6f}", file=sys.stderr)
    for lb, value in zip(result.weights.labels, result.weights.values):
        print(f"{lb}\t{value:.6f}")
    return 0


def _cmd_wer(args) -> int:
    hyps = [s.split() for s in read_sentences(args.hyp)]
    refs = [s.split() for s in read_sentences(args.ref)]
    if len(hyps) != len(refs):
        raise LmError(
            f"hypothesis file has {len(hyps)} lines, reference has {len(refs)}"
        )
    report = evaluate.corpus_wer(zip(hyps, refs))
    print(
        f"wer={report.wer:.6f} sub={report.substitutions} "
        f"del={report.deletions} ins={report.insertions}"
    )
    return 0


def _cmd_shard(args) -> int:
    m = _load_model(args.model)
    stores, plan = serve.shard_model(m, args.shards)
    os.makedirs(args.outdir, exist_ok=True)
    for store in stores:
        path = os.path.join(args.outdir, f"shard-{store.index:03d}.txt")
        serve.write_shard(store, path)
        print(f"shard_{store.index}={store.entry_count()}", file=sys.stderr)
        print(path)
    return 0


def _cmd_serve_shard(args) -> int:
    store = serve.read_shard(args.store)
    bind = os.environ.get(BIND_ENV, args.bind)
    server = serve.serve_shard(store, bind)
    server.install_signal_handlers()
    print(f"serving shard {store.index} on {server.endpoint}", file=sys.stderr)
    try:
        server._thread.join()
    except KeyboardInterrupt:
        server.shutdown()
    return 0


# ----------------------------------------------------------------------

def _build_parser() -> _Parser:
    p = _Parser(prog="ngramlm", description=__doc__)
    sub = p.add_subparsers(dest="command", metavar="command")

    sp = sub.add_parser("vocab", help="build a capped vocabulary")
    sp.add_argument("text")
    sp.add_argument("out")
    sp.add_argument("--max-vocab", type=int, default=None)
    sp.add_argument("--min-count", type=int, default=1)
    sp.set_defaults(func=_cmd_vocab)

    sp = sub.add_parser("count", help="count n-grams")
    sp.add_argument("text")
    sp.add_argument("out")
    sp.add_argument("--vocab", required=True)
    sp.add_argument("--order", type=int, default=3)
    sp.set_defaults(func=_cmd_count)

    sp = sub.add_parser("estimate", help="estimate a Kneser-Ney model")
    sp.add_argument("counts")
    sp.add_argument("out")
    sp.add_argument("--vocab", required=True)
    sp.add_argument("--discount", default="auto", help="'auto' or comma list")
    sp.set_defaults(func=_cmd_estimate)

    sp = sub.add_parser("prune", help="entropy-prune a model")
    sp.add_argument("model")
    sp.add_argument("out")
    sp.add_argument("--threshold", type=float, default=0.0)
    sp.add_argument("--target-size", type=int, default=None)
    sp.set_defaults(func=_cmd_prune)

    sp = sub.add_parser("interp", help="statically interpolate models")
    sp.add_argument("models", nargs="+")
    sp.add_argument("out")
    sp.add_argument("--weights", default=None, help="comma list or label=value")
    sp.add_argument("--fit-heldout", default=None, help="fit weights by EM on this text")
    sp.add_argument("--max-iters", type=int, default=100)
    sp.add_argument("--tol", type=float, default=1e-7)
    sp.set_defaults(func=_cmd_interp)

    sp = sub.add_parser("ppl", help="perplexity of text under a model/mixture")
    sp.add_argument("models", nargs="+")
    sp.add_argument("text")
    sp.add_argument("--weights", default=None)
    sp.add_argument("--no-eos", action="store_true")
    sp.add_argument("--per-sentence", action="store_true")
    sp.set_defaults(func=_cmd_ppl)

    sp = sub.add_parser("rescore", help="rescore a lattice with a model")
    sp.add_argument("lattice")
    sp.add_argument("out")
    sp.add_argument("--model", default=None)
    sp.add_argument("--manifest", default=None, help="shard manifest for remote rescoring")
    sp.add_argument("--lm-label", default="lm")
    sp.add_argument("--order", type=int, default=None)
    sp.set_defaults(func=_cmd_rescore)

    sp = sub.add_parser("mert", help="tune feature weights to minimize WER")
    sp.add_argument("manifest", help="lines: lattice_path<TAB>reference words")
    sp.add_argument("--vocab", default=None, help="map references through this vocab")
    sp.add_argument("--init", default=None, help="label=value,... initial weights")
    sp.add_argument("--rounds", type=int, default=8)
    sp.add_argument("--nbest", type=int, default=50)
    sp.add_argument("--random-directions", type=int, default=0)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=_cmd_mert)

    sp = sub.add_parser("wer", help="word error rate of hypothesis vs reference")
    sp.add_argument("hyp")
    sp.add_argument("ref")
    sp.set_defaults(func=_cmd_wer)

    sp = sub.add_parser("shard", help="partition a model into shard stores")
    sp.add_argument("model")
    sp.add_argument("outdir")
    sp.add_argument("--shards", type=int, required=True)
    sp.set_defaults(func=_cmd_shard)

    sp = sub.add_parser("serve-shard", help="serve one shard store over TCP")
    sp.add_argument("store")
    sp.add_argument("--bind", default="127.0.0.1:0",
                    help=f"host:port (env {BIND_ENV} overrides)")
    sp.set_defaults(func=_cmd_serve_shard)
    return p


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            raise _UsageError("missing subcommand")
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except (LmError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
