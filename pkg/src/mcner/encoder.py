"""Small trainable transformer encoder over whitespace tokens.

Stands in for a large pretrained backbone at desk scale: learned token and
position embeddings, a stack of self-attention + feed-forward blocks with
residual connections and layer norm, width and depth from config.  A triplet
is encoded as ``passage <sep> question <sep> option`` and the hidden states
are split back into the three segments by exact index slicing, so passage
row r always corresponds to passage token r.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import autograd as ag
from .autograd import Tensor
from .hrca import attention, init_attention_params, init_layer_norm_params, subparams, xavier
from .reconstruct import McTriplet

logger = logging.getLogger(__name__)


class SequenceLengthError(ValueError):
    pass


@dataclass(frozen=True)
class EncoderConfig:
    width: int = 64
    n_layers: int = 2
    n_heads: int = 4
    ffn_mult: int = 2
    max_len: int = 512

    def __post_init__(self):
        if self.width % self.n_heads != 0:
            raise ValueError(f"width {self.width} not divisible by n_heads {self.n_heads}")


class Vocabulary:
    """Token-to-id map with pad/separator/unknown specials at fixed ids."""

    PAD, SEP, UNK = 0, 1, 2
    SPECIALS = ("<pad>", "<sep>", "<unk>")

    def __init__(self, tokens: Sequence[str]):
        self.tokens = tuple(self.SPECIALS) + tuple(tokens)
        self._ids = {tok: i for i, tok in enumerate(self.tokens)}
        if len(self._ids) != len(self.tokens):
            raise ValueError("duplicate tokens in vocabulary")

    @classmethod
    def build(cls, token_groups: Iterable[Iterable[str]]) -> "Vocabulary":
        """Deterministic vocabulary: sorted unique tokens from all groups."""
        seen: set[str] = set()
        for group in token_groups:
            seen.update(group)
        seen -= set(cls.SPECIALS)
        return cls(sorted(seen))

    @classmethod
    def from_full_tokens(cls, tokens: Sequence[str]) -> "Vocabulary":
        """Rebuild from a serialized id->token list (specials included)."""
        tokens = tuple(tokens)
        if tokens[:3] != cls.SPECIALS:
            raise ValueError("token list does not start with the special tokens")
        return cls(tokens[3:])

    def __len__(self) -> int:
        return len(self.tokens)

    def encode(self, tokens: Sequence[str]) -> np.ndarray:
        return np.array([self._ids.get(t, self.UNK) for t in tokens], dtype=np.int64)

    def sha256(self) -> str:
        return hashlib.sha256("\n".join(self.tokens).encode("utf-8")).hexdigest()


@dataclass
class HiddenStates:
    """Encoder output split back into the triplet's segments."""

    passage: Tensor   # (k, d)
    question: Tensor  # (m, d)
    option: Tensor    # (n, d)
    option_index: int

    @property
    def encoded_length(self) -> int:
        # two separator positions sit between the segments
        return self.passage.shape[0] + self.question.shape[0] + self.option.shape[0] + 2


def init_encoder_params(rng: np.random.Generator, vocab_size: int, config: EncoderConfig) -> dict[str, Tensor]:
    d = config.width
    params: dict[str, Tensor] = {
        "embed.tok": ag.parameter(rng.uniform(-0.1, 0.1, size=(vocab_size, d))),
        "embed.pos": ag.parameter(rng.uniform(-0.1, 0.1, size=(config.max_len, d))),
    }
    for layer in range(config.n_layers):
        prefix = f"enc.{layer}"
        params.update(init_attention_params(rng, d, d, f"{prefix}.attn"))
        params.update(init_layer_norm_params(d, f"{prefix}.ln1"))
        ff = config.ffn_mult * d
        params[f"{prefix}.ffn.w1"] = ag.parameter(xavier(rng, d, ff))
        params[f"{prefix}.ffn.b1"] = ag.parameter(np.zeros(ff))
        params[f"{prefix}.ffn.w2"] = ag.parameter(xavier(rng, ff, d))
        params[f"{prefix}.ffn.b2"] = ag.parameter(np.zeros(d))
        params.update(init_layer_norm_params(d, f"{prefix}.ln2"))
    return params


def embed_ids(ids: np.ndarray, params: Mapping[str, Tensor]) -> Tensor:
    """Embedding layer only: token rows plus position rows."""
    positions = np.arange(len(ids))
    return ag.add(ag.embedding(params["embed.tok"], ids),
                  ag.embedding(params["embed.pos"], positions))


def encode_ids(ids: np.ndarray, params: Mapping[str, Tensor], config: EncoderConfig) -> Tensor:
    if len(ids) > config.max_len:
        raise SequenceLengthError(f"sequence of {len(ids)} exceeds max_len {config.max_len}")
    x = embed_ids(ids, params)
    for layer in range(config.n_layers):
        prefix = f"enc.{layer}"
        attended = attention(x, x, x, subparams(params, f"{prefix}.attn"), config.n_heads)
        x = ag.layer_norm(ag.add(x, attended), params[f"{prefix}.ln1.g"], params[f"{prefix}.ln1.b"])
        hidden = ag.gelu(ag.linear(x, params[f"{prefix}.ffn.w1"], params[f"{prefix}.ffn.b1"]))
        ff = ag.linear(hidden, params[f"{prefix}.ffn.w2"], params[f"{prefix}.ffn.b2"])
        x = ag.layer_norm(ag.add(x, ff), params[f"{prefix}.ln2.g"], params[f"{prefix}.ln2.b"])
    return x


def _fit_segments(
    passage: Sequence[str], question: Sequence[str], option: Sequence[str],
    max_len: int, truncate: bool,
) -> tuple[Sequence[str], Sequence[str], Sequence[str]]:
    total = len(passage) + len(question) + len(option) + 2
    if total <= max_len:
        return passage, question, option
    if not truncate:
        raise SequenceLengthError(
            f"triplet needs {total} positions but max_len is {max_len}; "
            "enable truncation to trim the option tail"
        )
    # trim from the option's tail first, then the question; passage goes last
    over = total - max_len
    for name, seg in (("option", option), ("question", question)):
        cut = min(over, len(seg) - 1)
        if cut > 0:
            logger.warning("truncating %s by %d token(s) to fit max_len=%d", name, cut, max_len)
            seg = seg[: len(seg) - cut]
            over -= cut
        if name == "option":
            option = seg
        else:
            question = seg
    if over > 0:
        logger.warning("truncating passage by %d token(s) to fit max_len=%d", over, max_len)
        passage = passage[: len(passage) - over]
    return passage, question, option


def encode_triplet(
    triplet: McTriplet,
    option_index: int,
    params: Mapping[str, Tensor],
    config: EncoderConfig,
    vocab: Vocabulary,
    truncate: bool = False,
) -> HiddenStates:
    """Encode ``passage <sep> question <sep> option[i]`` and split the states."""
    if not 0 <= option_index < triplet.n_options:
        raise IndexError(f"option_index {option_index} out of range for {triplet.n_options} options")
    passage, question, option = _fit_segments(
        triplet.passage, triplet.question, triplet.options[option_index],
        config.max_len, truncate,
    )
    sep = np.array([Vocabulary.SEP], dtype=np.int64)
    ids = np.concatenate([vocab.encode(passage), sep, vocab.encode(question), sep, vocab.encode(option)])
    x = encode_ids(ids, params, config)
    k, m = len(passage), len(question)
    return HiddenStates(
        passage=ag.rows(x, 0, k),
        question=ag.rows(x, k + 1, k + 1 + m),
        option=ag.rows(x, k + m + 2, len(ids)),
        option_index=option_index,
    )


def encode_all_options(
    triplet: McTriplet,
    params: Mapping[str, Tensor],
    config: EncoderConfig,
    vocab: Vocabulary,
    truncate: bool = False,
) -> list[HiddenStates]:
    """One encoding pass per option, in catalog order."""
    return [
        encode_triplet(triplet, i, params, config, vocab, truncate=truncate)
        for i in range(triplet.n_options)
    ]
