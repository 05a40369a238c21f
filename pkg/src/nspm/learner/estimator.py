"""scikit-learn style wrapper around the encoder-decoder."""
from sklearn.base import BaseEstimator

from ..validation import check_is_fitted, check_pairs, check_positive, check_sequences
from .model import init_model
from .training import TrainConfig, sequence_accuracy, train, translate_batch
from .vocab import build_vocab


class Seq2SeqTranslator(BaseEstimator):
    """Token-sequence translator trained with teacher forcing.

    ``X`` and ``y`` are collections of token sequences (lists of strings,
    or whitespace-separated strings).  After ``fit`` the trained network
    is ``model_`` and the learning curve is ``curve_``.
    """

    def __init__(self, embed_dim=128, hidden_dim=128, num_layers=2, dropout=0.2,
                 bidirectional=False, epochs=10, batch_size=32, learning_rate=1e-3,
                 optimizer="adam", grad_clip_norm=5.0, eval_every=1, min_count=1,
                 max_len=60, preset=None, random_state=0):
        self.embed_dim = embed_dim
        self.hidden_dim = hidden_dim
        self.num_layers = num_layers
        self.dropout = dropout
        self.bidirectional = bidirectional
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.optimizer = optimizer
        self.grad_clip_norm = grad_clip_norm
        self.eval_every = eval_every
        self.min_count = min_count
        self.max_len = max_len
        self.preset = preset
        self.random_state = random_state

    def _train_config(self):
        return TrainConfig(
            epochs=self.epochs, batch_size=self.batch_size, learning_rate=self.learning_rate,
            optimizer=self.optimizer, grad_clip_norm=self.grad_clip_norm,
            seed=self.random_state, eval_every=self.eval_every, max_len=self.max_len,
        )

    def fit(self, X, y, X_dev=None, y_dev=None, callback=None):
        X, y = check_pairs(X, y)
        for name in ("embed_dim", "hidden_dim", "num_layers", "min_count", "max_len"):
            check_positive(getattr(self, name), name)
        dev = []
        if X_dev is not None or y_dev is not None:
            dev = list(zip(*check_pairs(X_dev, y_dev)))
        config = self._train_config()
        model = init_model(
            build_vocab(X, self.min_count), build_vocab(y, self.min_count),
            self.embed_dim, self.hidden_dim, self.num_layers, self.dropout,
            self.bidirectional, seed=self.random_state, preset=self.preset,
        )
        self.model_, self.curve_ = train(model, list(zip(X, y)), dev, config, callback)
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_sequences(X, allow_empty_items=True)
        return translate_batch(self.model_, [list(x) for x in X], self.max_len)

    def score(self, X, y):
        """Corpus BLEU of the greedy translations."""
        from ..evaluator import bleu_corpus

        X, y = check_pairs(X, y)
        return bleu_corpus(self.predict(X), [list(t) for t in y])

    def sequence_accuracy(self, X, y):
        check_is_fitted(self, "model_")
        X, y = check_pairs(X, y)
        return sequence_accuracy(self.model_, list(zip(X, y)), self.max_len)


class NeuralSparqlMachine(BaseEstimator):
    """Questions in, SPARQL text out.

    Queries are encoded with the codec ``preset`` for training; predictions
    pass through the repairing interpreter and come back as canonical
    query text, or ``None`` when the output cannot be repaired.
    """

    def __init__(self, preset="v3", translator=None):
        self.preset = preset
        self.translator = translator

    def fit(self, questions, queries, dev_questions=None, dev_queries=None):
        from ..sparql_codec import encode_query, get_preset, parse_sparql, tokenize_nl

        preset = get_preset(self.preset)
        X = [tokenize_nl(q) for q in questions]
        y = [encode_query(parse_sparql(q), preset) for q in queries]
        kwargs = {}
        if dev_questions is not None:
            kwargs = {"X_dev": [tokenize_nl(q) for q in dev_questions],
                      "y_dev": [encode_query(parse_sparql(q), preset) for q in dev_queries]}
        base = self.translator if self.translator is not None else Seq2SeqTranslator()
        self.translator_ = type(base)(**base.get_params())
        self.translator_.set_params(preset=preset.id)
        self.translator_.fit(X, y, **kwargs)
        return self

    def predict(self, questions):
        from ..exceptions import Unrepairable
        from ..interpreter import interpret
        from ..sparql_codec import tokenize_nl

        check_is_fitted(self, "translator_")
        out = []
        for seq in self.translator_.predict([tokenize_nl(q) for q in questions]):
            try:
                out.append(interpret(seq, self.preset)[0])
            except Unrepairable:
                out.append(None)
        return out

    def score(self, questions, queries):
        """Exact-match accuracy on canonical query strings."""
        from ..evaluator import exact_match_accuracy

        return exact_match_accuracy(self.predict(questions), list(queries))
