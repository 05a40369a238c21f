from collections import Counter

PAD, BOS, EOS, UNK = 0, 1, 2, 3
RESERVED = ("<pad>", "<s>", "</s>", "<unk>")


class Vocab:
    """Token <-> index table with four reserved slots.

    Index 0 is padding, 1 begin-of-sequence, 2 end-of-sequence and 3 the
    unknown token that every out-of-vocabulary lookup maps to.
    """

    def __init__(self, tokens=()):
        self.itos = list(RESERVED)
        for tok in tokens:
            if tok in RESERVED:
                raise ValueError(f"data token {tok!r} collides with a reserved token")
            self.itos.append(tok)
        self.stoi = {tok: i for i, tok in enumerate(self.itos)}
        if len(self.stoi) != len(self.itos):
            raise ValueError("duplicate tokens in vocabulary")

    def __len__(self):
        return len(self.itos)

    def __contains__(self, token):
        return token in self.stoi

    def __eq__(self, other):
        return isinstance(other, Vocab) and self.itos == other.itos

    def __repr__(self):
        return f"Vocab({len(self)} tokens)"

    def lookup(self, token):
        return self.stoi.get(token, UNK)

    def encode(self, tokens, add_eos=False):
        ids = [self.stoi.get(t, UNK) for t in tokens]
        if add_eos:
            ids.append(EOS)
        return ids

    def decode(self, ids):
        """Map indices back to tokens, stopping at EOS and skipping PAD/BOS."""
        out = []
        for i in ids:
            if i == EOS:
                break
            if i in (PAD, BOS):
                continue
            out.append(self.itos[i])
        return out


def build_vocab(sequences, min_count=1):
    """Tokens seen at least ``min_count`` times, most frequent first."""
    counts = Counter(tok for seq in sequences for tok in seq)
    kept = sorted((t for t, c in counts.items() if c >= min_count), key=lambda t: (-counts[t], t))
    return Vocab(kept)
