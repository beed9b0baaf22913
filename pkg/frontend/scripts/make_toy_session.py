#!/usr/bin/env python3
"""Build a toy checkpoint and constraint inventories for the UI e2e test.

Writes corpus fixtures, then drives the installed `sentsimp` CLI (train,
build-lexicon, extract-templates) so the frontend consumes the backend
purely through its public interfaces. Prints the artifact directory on
success.
"""

import subprocess
import sys
from pathlib import Path

VERBS = {"occurs": "is", "terminates": "ends", "purchases": "buys"}
NOUNS = ["cat", "dog", "bird", "fox", "cow", "hen"]
OBJECTS = ["mat", "rope", "cart", "lamp", "door", "stone"]


def lexical_conllu(tokens):
    rows = [
        (1, tokens[0], 2, "det"),
        (2, tokens[1], 3, "nsubj"),
        (3, tokens[2], 0, "root"),
        (4, tokens[3], 6, "det"),
        (5, tokens[4], 6, "amod"),
        (6, tokens[5], 3, "obj"),
        (7, tokens[6], 3, "punct"),
    ]
    return "\n".join(f"{i}\t{w}\t_\t_\t_\t_\t{h}\t{r}\t_\t_" for i, w, h, r in rows) + "\n"


def conj_conllu(tokens):
    rows = [(1, tokens[0], 0, "root"), (2, tokens[1], 3, "cc"),
            (3, tokens[2], 1, "conj"), (4, tokens[3], 1, "punct")]
    return "\n".join(f"{i}\t{w}\t_\t_\t_\t_\t{h}\t{r}\t_\t_" for i, w, h, r in rows) + "\n"


def build_corpus():
    sources, targets, src_conllu, tgt_conllu = [], [], [], []
    verbs = list(VERBS)
    adjs = [("arduous", "hard"), ("enormous", "big"), ("luminous", "bright")]
    for i in range(12):
        verb = verbs[i % 3]
        adj, simple_adj = adjs[(i // 3) % 3]
        src = ["the", NOUNS[i % 6], verb, "a", adj, OBJECTS[(i * 5 + 1) % 6], "."]
        tgt = list(src)
        if i % 6 != 0:
            tgt[2] = VERBS[verb]
        if i % 2 == 0:
            tgt[4] = simple_adj
        sources.append(" ".join(src))
        targets.append(" ".join(tgt))
        src_conllu.append(lexical_conllu(src))
        tgt_conllu.append(lexical_conllu(tgt))
    for i in range(6):
        v1 = ["run", "play", "jump"][i % 3]
        v2 = ["rest", "sing", "walk"][i % 3]
        src = [v1, "and", v2, "."]
        sources.append(" ".join(src))
        src_conllu.append(conj_conllu(src))
        if i < 2:
            targets.append(f"{v1} .")
            tgt_conllu.append("1\t%s\t_\t_\t_\t_\t0\troot\t_\t_\n"
                              "2\t.\t_\t_\t_\t_\t1\tpunct\t_\t_\n" % v1)
        else:
            targets.append(" ".join(src))
            tgt_conllu.append(conj_conllu(src))
    return sources, targets, src_conllu, tgt_conllu


def run_cli(*args):
    result = subprocess.run([sys.executable, "-m", "sentsimp.cli", *args],
                            capture_output=True, text=True)
    if result.returncode != 0:
        sys.stderr.write(result.stdout + result.stderr)
        raise SystemExit(f"cli failed: {' '.join(args[:2])}")


def main(out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    sources, targets, src_conllu, tgt_conllu = build_corpus()
    (out_dir / "train.cplx").write_text("\n".join(sources) + "\n")
    (out_dir / "train.simp").write_text("\n".join(targets) + "\n")
    (out_dir / "train.cplx.conllu").write_text("\n".join(src_conllu))
    (out_dir / "train.simp.conllu").write_text("\n".join(tgt_conllu))
    (out_dir / "config.ini").write_text(
        "hidden_dim = 48\nfeedforward_dim = 96\nheads = 4\nlayers = 2\n"
        "vocab_cap = 300\n")

    # trained without source parses: the service decodes raw token input, so
    # the model must learn its templates from the token side alone
    run_cli("train",
            "--complex", str(out_dir / "train.cplx"),
            "--simple", str(out_dir / "train.simp"),
            "--simple-conllu", str(out_dir / "train.simp.conllu"),
            "--out", str(out_dir / "model.ckpt"),
            "--epochs", "60", "--seed", "7", "--validate-every", "10",
            "--patience", "2", "--config", str(out_dir / "config.ini"))
    run_cli("build-lexicon",
            "--complex", str(out_dir / "train.cplx"),
            "--simple", str(out_dir / "train.simp"),
            "--list-out", str(out_dir / "complex.txt"),
            "--dict-out", str(out_dir / "dict.tsv"),
            "--n", "6", "--threshold", "0.4", "--no-manual")
    run_cli("extract-templates",
            "--conllu", str(out_dir / "train.cplx.conllu"),
            "--simple-conllu", str(out_dir / "train.simp.conllu"),
            "--synchronous-out", str(out_dir / "sync.tsv"),
            "--ranked-out", str(out_dir / "ranked.txt"))
    print(out_dir)


if __name__ == "__main__":
    main(Path(sys.argv[1] if len(sys.argv) > 1 else "toy-session"))
