import random

from cswitch.corpus import Sentence, SentencePair


def synthetic_dictionary_corpus(
    n_pairs: int,
    vocab_size: int = 200,
    min_len: int = 3,
    max_len: int = 12,
    seed: int = 13,
    reverse: bool = False,
):
    """Monotone (or reversed) word-for-word corpus with gold alignments
    known by construction: source word src_i maps to target word tgt_i."""
    rng = random.Random(seed)
    pairs = []
    gold = []
    for _ in range(n_pairs):
        length = rng.randint(min_len, max_len)
        word_ids = [rng.randrange(vocab_size) for _ in range(length)]
        src = tuple(f"s{w}" for w in word_ids)
        tgt_ids = list(reversed(word_ids)) if reverse else word_ids
        tgt = tuple(f"t{w}" for w in tgt_ids)
        pairs.append(SentencePair(Sentence(src, "en"), Sentence(tgt, "fr")))
        if reverse:
            gold.append({(i, length - 1 - i) for i in range(length)})
        else:
            gold.append({(i, i) for i in range(length)})
    return pairs, gold


def link_f1(predicted, gold) -> float:
    """Micro-averaged F1 of predicted link sets against gold link sets."""
    tp = fp = fn = 0
    for pred, ref in zip(predicted, gold):
        links = pred.links if hasattr(pred, "links") else pred
        tp += len(links & ref)
        fp += len(links - ref)
        fn += len(ref - links)
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)
