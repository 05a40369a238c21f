"""From-scratch LSTM encoder-decoder in numpy."""
from .checkpoint import dumps_model, load_model, loads_model, save_model
from .estimator import NeuralSparqlMachine, Seq2SeqTranslator
from .model import Seq2SeqModel, init_model
from .network import forward_loss, greedy_decode, output_distribution, pad_batch
from .training import (
    CurvePoint,
    TrainConfig,
    convergence_epoch,
    curve_to_csv,
    read_curve_csv,
    sequence_accuracy,
    train,
    translate,
    translate_batch,
)
from .vocab import BOS, EOS, PAD, RESERVED, UNK, Vocab, build_vocab

__all__ = [
    "BOS", "EOS", "PAD", "UNK", "RESERVED", "Vocab", "build_vocab",
    "Seq2SeqModel", "init_model", "forward_loss", "greedy_decode", "output_distribution", "pad_batch",
    "TrainConfig", "CurvePoint", "train", "translate", "translate_batch", "sequence_accuracy",
    "curve_to_csv", "read_curve_csv", "convergence_epoch",
    "save_model", "load_model", "dumps_model", "loads_model",
    "Seq2SeqTranslator", "NeuralSparqlMachine",
]
