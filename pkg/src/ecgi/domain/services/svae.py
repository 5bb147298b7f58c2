"""Sequential variational autoencoder over TMP sequences.

The encoder maps a TMP sequence (n × T) through two stacked LSTMs to a
per-column diagonal Gaussian over a latent sequence (d × T); the decoder
mirrors it back to a per-column diagonal Gaussian over TMP. Parameters live
in a flat name → array mapping named "<part>.<layer>.<W|b>".
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ..entities import (
    Corpus,
    DecoderOutput,
    EncoderOutput,
    EpochRecord,
    TMPSequence,
    TrainingLog,
    VAEWeights,
    ZPrior,
)
from ..exceptions import InvalidArgumentException, NonFiniteException
from ..value_objects import Activation, SVAEConfig
from .neural import (
    AdamState,
    DenseHead,
    LSTMLayer,
    adam_step,
    dense_backward,
    dense_forward,
    init_dense,
    init_lstm,
    lstm_backward,
    lstm_forward,
)

logger = logging.getLogger(__name__)

LAYERS = ("lstm1", "lstm2", "mean", "var")
VARIANCE_HEAD = ("decoder.var.W", "decoder.var.b")
LOG_2PI = np.log(2.0 * np.pi)

SequenceBatch = Union[Corpus, np.ndarray, List[TMPSequence]]


def init_weights(config: SVAEConfig, rng: Optional[np.random.Generator] = None) -> VAEWeights:
    """Uniform ±1/√fan initialization and forget-gate bias 1.

    Head biases are zero except the decoder variance head, which starts at
    log(decoder_variance_init).
    """
    rng = rng or np.random.default_rng(config.seed)
    n, d = config.n_nodes, config.latent_dim
    e1, e2 = config.encoder_hidden
    g1, g2 = config.decoder_hidden
    blocks = {
        "encoder.lstm1": init_lstm(n, e1, rng),
        "encoder.lstm2": init_lstm(e1, e2, rng),
        "encoder.mean": init_dense(e2, d, rng),
        "encoder.var": init_dense(e2, d, rng, Activation.EXP_CLAMPED),
        "decoder.lstm1": init_lstm(d, g1, rng),
        "decoder.lstm2": init_lstm(g1, g2, rng),
        "decoder.mean": init_dense(g2, n, rng),
        "decoder.var": init_dense(g2, n, rng, Activation.EXP_CLAMPED),
    }
    params: Dict[str, np.ndarray] = {}
    for prefix, block in blocks.items():
        params[f"{prefix}.W"] = block.W
        params[f"{prefix}.b"] = block.b
    params["decoder.var.b"] = np.full(n, np.log(config.decoder_variance_init))
    return VAEWeights(config, params, {"seed": config.seed})


def _network(weights: VAEWeights, part: str):
    p = weights.params
    try:
        return (
            LSTMLayer(p[f"{part}.lstm1.W"], p[f"{part}.lstm1.b"]),
            LSTMLayer(p[f"{part}.lstm2.W"], p[f"{part}.lstm2.b"]),
            DenseHead(p[f"{part}.mean.W"], p[f"{part}.mean.b"]),
            DenseHead(p[f"{part}.var.W"], p[f"{part}.var.b"], Activation.EXP_CLAMPED),
        )
    except KeyError as e:
        raise InvalidArgumentException(f"weights are missing parameter {e.args[0]}") from e


@dataclass
class NetworkTape:
    """Forward intermediates of one encoder or decoder pass."""

    part: str
    caches: Tuple


def _forward(weights: VAEWeights, part: str, x3: np.ndarray):
    lstm1, lstm2, mean, var = _network(weights, part)
    h1, c1 = lstm_forward(lstm1, x3)
    h2, c2 = lstm_forward(lstm2, h1)
    M, cm = dense_forward(mean, h2)
    S, cv = dense_forward(var, h2)
    return M, S, NetworkTape(part, (c1, c2, cm, cv))


def _backward(
    weights: VAEWeights, tape: NetworkTape, dM: np.ndarray, dS: np.ndarray
) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
    lstm1, lstm2, mean, var = _network(weights, tape.part)
    c1, c2, cm, cv = tape.caches
    dh_mean, g_mean = dense_backward(mean, cm, dM)
    dh_var, g_var = dense_backward(var, cv, dS)
    dh1, g2 = lstm_backward(lstm2, c2, dh_mean + dh_var)
    dx, g1 = lstm_backward(lstm1, c1, dh1)
    grads = {}
    for layer, g in zip(LAYERS, (g1, g2, g_mean, g_var)):
        grads[f"{tape.part}.{layer}.W"] = g["W"]
        grads[f"{tape.part}.{layer}.b"] = g["b"]
    return dx, grads


def _as_array(x: Union[np.ndarray, TMPSequence]) -> np.ndarray:
    return x.U if isinstance(x, TMPSequence) else np.asarray(x, dtype=np.float64)


def _stack(sequences: SequenceBatch) -> np.ndarray:
    if isinstance(sequences, Corpus):
        return sequences.tmp_stack()
    if isinstance(sequences, np.ndarray):
        return sequences if sequences.ndim == 3 else sequences[None]
    return np.stack([_as_array(s) for s in sequences])


def encode(weights: VAEWeights, U: Union[np.ndarray, TMPSequence]) -> EncoderOutput:
    """q(Z|U) for one (n, T) sequence or a (B, n, T) batch."""
    x = _as_array(U)
    if x.shape[-2] != weights.config.n_nodes:
        raise InvalidArgumentException(
            f"encoder expects {weights.config.n_nodes} nodes, got {x.shape[-2]}"
        )
    M, S, _ = _forward(weights, "encoder", x)
    return EncoderOutput(M, S)


def decoder_forward(weights: VAEWeights, Z: np.ndarray) -> Tuple[DecoderOutput, NetworkTape]:
    Z = np.asarray(Z, dtype=np.float64)
    if Z.shape[-2] != weights.config.latent_dim:
        raise InvalidArgumentException(
            f"decoder expects latent dimension {weights.config.latent_dim}, got {Z.shape[-2]}"
        )
    M, S, tape = _forward(weights, "decoder", Z)
    return DecoderOutput(M, S), tape


def decoder_backward(
    weights: VAEWeights, tape: NetworkTape, dM: np.ndarray, dS: np.ndarray
) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
    """Gradient of a scalar f(M_θ, S_θ) w.r.t. Z and the decoder weights, given ∂f/∂M_θ and ∂f/∂S_θ."""
    return _backward(weights, tape, dM, dS)


def decode(weights: VAEWeights, Z: np.ndarray) -> DecoderOutput:
    output, _ = decoder_forward(weights, Z)
    return output


def _kl_elements(M: np.ndarray, S: np.ndarray) -> np.ndarray:
    return 0.5 * (S + M**2 - 1.0 - np.log(S))


def _reconstruction_elements(M: np.ndarray, S: np.ndarray, U: np.ndarray) -> np.ndarray:
    return -0.5 * (LOG_2PI + np.log(S)) - (U - M) ** 2 / (2.0 * S)


def kl_term(enc: EncoderOutput) -> float:
    """KL(q(Z|U) ‖ N(0, I)) summed over latent dimensions and columns."""
    return float(np.sum(_kl_elements(enc.M, enc.S)))


def reconstruction_term(dec: DecoderOutput, U: Union[np.ndarray, TMPSequence]) -> float:
    """Gaussian log-likelihood of U under the decoder, summed over nodes and columns."""
    x = _as_array(U)
    if x.shape != dec.M.shape:
        raise InvalidArgumentException(f"U shape {x.shape} does not match decoder output {dec.M.shape}")
    return float(np.sum(_reconstruction_elements(dec.M, dec.S, x)))


@dataclass
class ElboEvaluation:
    objective: float
    reconstruction: np.ndarray   # per sequence
    kl: np.ndarray               # per sequence
    decoder_mean: np.ndarray
    grads: Dict[str, np.ndarray]

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.objective)) and all(
            np.all(np.isfinite(g)) for g in self.grads.values()
        )


def elbo_and_gradients(
    weights: VAEWeights,
    U: np.ndarray,
    eps: np.ndarray,
    kl_weight: float = 1.0,
) -> ElboEvaluation:
    """Batch-mean of reconstruction − kl_weight·KL at fixed noise eps, with exact gradients.

    U is (B, n, T) and eps (B, d, T); Z = M_φ + √S_φ ⊙ eps.
    """
    U = _stack(U)
    eps = eps if eps.ndim == 3 else eps[None]
    B = U.shape[0]

    M_phi, S_phi, enc_tape = _forward(weights, "encoder", U)
    if eps.shape != M_phi.shape:
        raise InvalidArgumentException(f"noise shape {eps.shape} does not match latent {M_phi.shape}")
    root = np.sqrt(S_phi)
    Z = M_phi + root * eps
    M_th, S_th, dec_tape = _forward(weights, "decoder", Z)

    recon = _reconstruction_elements(M_th, S_th, U).sum(axis=(1, 2))
    kl = _kl_elements(M_phi, S_phi).sum(axis=(1, 2))
    objective = float(np.mean(recon - kl_weight * kl))

    residual = U - M_th
    dM_th = residual / S_th / B
    dS_th = (residual**2 / (2.0 * S_th**2) - 0.5 / S_th) / B
    dZ, grads = _backward(weights, dec_tape, dM_th, dS_th)

    dM_phi = dZ - kl_weight * M_phi / B
    dS_phi = dZ * eps / (2.0 * root) - kl_weight * 0.5 * (1.0 - 1.0 / S_phi) / B
    _, enc_grads = _backward(weights, enc_tape, dM_phi, dS_phi)
    grads.update(enc_grads)

    return ElboEvaluation(objective, recon, kl, M_th, grads)


def _elbo_values(weights: VAEWeights, U: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """Per-sequence one-sample ELBO without gradients."""
    M_phi, S_phi, _ = _forward(weights, "encoder", U)
    Z = M_phi + np.sqrt(S_phi) * eps
    M_th, S_th, _ = _forward(weights, "decoder", Z)
    recon = _reconstruction_elements(M_th, S_th, U).sum(axis=(1, 2))
    return recon - _kl_elements(M_phi, S_phi).sum(axis=(1, 2))


def reconstruction_rmse(weights: VAEWeights, sequences: SequenceBatch) -> float:
    """RMSE of decode(encoder mean) against the inputs."""
    U = _stack(sequences)
    M_phi, _, _ = _forward(weights, "encoder", U)
    M_th, _, _ = _forward(weights, "decoder", M_phi)
    return float(np.sqrt(np.mean((M_th - U) ** 2)))


def train(
    corpus: SequenceBatch,
    config: SVAEConfig,
    validation: Optional[SequenceBatch] = None,
) -> Tuple[VAEWeights, TrainingLog]:
    """Maximize the one-sample ELBO with Adam.

    The KL weight ramps up linearly, the step size follows a cosine decay and
    the decoder variance head is held at its initial value until the variance
    warm-up ends, so early epochs fit the decoder mean.
    """
    data = _stack(corpus)
    if data.shape[0] < 1:
        raise InvalidArgumentException("training needs at least one sequence")
    if data.shape[1] != config.n_nodes:
        raise InvalidArgumentException(
            f"config expects {config.n_nodes} nodes, corpus has {data.shape[1]}"
        )
    N, _, T = data.shape
    d = config.latent_dim

    rng = np.random.default_rng(config.seed)
    weights = init_weights(config, rng)
    state = AdamState()
    log = TrainingLog()

    val = _stack(validation) if validation is not None and len(validation) else None
    val_eps = (
        np.random.default_rng([config.seed, 1]).standard_normal((val.shape[0], d, T))
        if val is not None
        else None
    )

    for epoch in range(1, config.epochs + 1):
        kl_weight = config.kl_weight_at(epoch)
        lr = config.learning_rate_at(epoch)
        frozen = () if config.decoder_variance_trainable(epoch) else VARIANCE_HEAD
        order = rng.permutation(N)
        elbo_sum = 0.0
        squared_error = 0.0
        for start in range(0, N, config.batch_size):
            batch = order[start:start + config.batch_size]
            eps = rng.standard_normal((len(batch), d, T))
            evaluation = elbo_and_gradients(weights, data[batch], eps, kl_weight)
            if not evaluation.is_finite():
                raise NonFiniteException(
                    f"non-finite ELBO or gradient at epoch {epoch}",
                    {
                        "epoch": epoch,
                        "batch": [int(i) for i in batch],
                        "objective": evaluation.objective,
                        "kl_weight": kl_weight,
                    },
                )
            descent = {name: -g for name, g in evaluation.grads.items() if name not in frozen}
            adam_step(weights.params, descent, state, lr=lr)
            elbo_sum += float(np.sum(evaluation.reconstruction - evaluation.kl))
            squared_error += float(np.sum((evaluation.decoder_mean - data[batch]) ** 2))

        val_elbo = float(np.mean(_elbo_values(weights, val, val_eps))) if val is not None else None
        record = EpochRecord(
            epoch=epoch,
            train_elbo=elbo_sum / N,
            val_elbo=val_elbo,
            kl_weight=kl_weight,
            reconstruction_rmse=float(np.sqrt(squared_error / data.size)),
        )
        log.epochs.append(record)
        logger.info(
            "epoch %d/%d: train ELBO %.4g, val ELBO %s, KL weight %.3g, RMSE %.4g",
            epoch, config.epochs, record.train_elbo,
            "n/a" if val_elbo is None else f"{val_elbo:.4g}",
            kl_weight, record.reconstruction_rmse,
        )

    weights.metadata.update(
        {
            "epochs": config.epochs,
            "final_train_elbo": log.epochs[-1].train_elbo,
            "final_val_elbo": log.epochs[-1].val_elbo,
            "train_count": N,
            "val_count": 0 if val is None else int(val.shape[0]),
        }
    )
    return weights, log


def estimate_z_prior(weights: VAEWeights, corpus: SequenceBatch) -> ZPrior:
    """Moment-matched Gaussian over Z from encoder outputs of the training sequences.

    Z̄ is the mean of encoder means; C adds the mean encoder variance to the
    population variance of the encoder means. The encoder means are kept as
    anchors for choosing an inference starting point.
    """
    data = _stack(corpus)
    if data.shape[0] < 2:
        raise InvalidArgumentException("the Z prior needs at least two training sequences")
    enc = encode(weights, data)
    Z_bar = enc.M.mean(axis=0)
    C = enc.S.mean(axis=0) + enc.M.var(axis=0)
    logger.info("Z prior from %d sequences: mean variance %.4g", data.shape[0], float(C.mean()))
    return ZPrior(Z_bar, C, anchors=enc.M.copy())


def sample_sequences(
    weights: VAEWeights,
    count: int,
    rng: np.random.Generator,
    prior: Optional[ZPrior] = None,
    columns: Optional[int] = None,
) -> np.ndarray:
    """Decoder means for latent draws from the Z prior, or from N(0, I) when prior is None."""
    if count < 1:
        raise InvalidArgumentException("count must be positive")
    d = weights.config.latent_dim
    if prior is not None:
        eps = rng.standard_normal((count,) + prior.Z_bar.shape)
        Z = prior.Z_bar + np.sqrt(prior.C) * eps
    else:
        if columns is None or columns < 1:
            raise InvalidArgumentException("columns is required when sampling from N(0, I)")
        Z = rng.standard_normal((count, d, columns))
    return decode(weights, Z).M


def plausibility_fraction(samples: np.ndarray, low: float = -0.3, high: float = 1.3) -> float:
    """Share of sampled values inside the physiological band [low, high]."""
    samples = np.asarray(samples)
    if samples.size == 0:
        return 0.0
    return float(np.mean((samples >= low) & (samples <= high)))
