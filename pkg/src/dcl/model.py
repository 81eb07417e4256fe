"""A small dense multi-attribute network with hand-written gradients.

Architecture: a shared ReLU trunk, then for every attribute a linear
embedding layer (the space the triplet loss works in) and a 2-class linear
head on top of that embedding.  The per-attribute embedding and head
parameters are stored stacked along an attribute axis so the whole
multi-attribute forward and backward pass runs as a few large matrix
products instead of a Python loop over attributes.

No autodiff: ``forward`` returns a cache, ``backward`` consumes it together
with upstream gradients and accumulates parameter gradients, and
``sgd_update`` applies them.  Everything is float64.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DataError

CHECKPOINT_MAGIC = b"DCLNET01"
CHECKPOINT_VERSION = 1


@dataclass(eq=False)
class ForwardCache:
    """Intermediate activations kept for the backward pass, tied to the
    parameter version they were computed with."""

    inputs: np.ndarray
    trunk_pre: list[np.ndarray]
    trunk_post: list[np.ndarray]
    embeddings: np.ndarray
    version: int


class DenseNet:
    """Shared trunk + per-attribute embeddings and heads.

    Parameters (with H the trunk output width, A attributes, D embedding
    dim, C classes):

      trunk_w[i], trunk_b[i]   ReLU trunk layers
      embed_w [H x A x D], embed_b [A x D]   linear embeddings
      head_w  [A x D x C], head_b  [A x C]   class logits

    A matching ``*_g`` gradient buffer exists for every parameter; backward
    accumulates into them and ``sgd_update`` consumes and zeroes them.
    """

    def __init__(
        self,
        feature_dim: int,
        num_attributes: int,
        trunk_widths: tuple[int, ...] = (256,),
        embedding_dim: int = 64,
        num_classes: int = 2,
        seed: int = 0,
    ):
        if feature_dim < 1 or num_attributes < 1 or embedding_dim < 1 or num_classes < 2:
            raise ValueError("bad architecture dimensions")
        if len(trunk_widths) < 1 or any(w < 1 for w in trunk_widths):
            raise ValueError("trunk_widths must be positive")
        self.feature_dim = int(feature_dim)
        self.num_attributes = int(num_attributes)
        self.trunk_widths = tuple(int(w) for w in trunk_widths)
        self.embedding_dim = int(embedding_dim)
        self.num_classes = int(num_classes)
        self.version = 0

        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), 2001])))
        self.trunk_w: list[np.ndarray] = []
        self.trunk_b: list[np.ndarray] = []
        fan_in = feature_dim
        for width in self.trunk_widths:
            self.trunk_w.append(_glorot(rng, (fan_in, width), fan_in, width))
            self.trunk_b.append(np.zeros(width))
            fan_in = width
        h = self.trunk_widths[-1]
        self.embed_w = _glorot(rng, (h, num_attributes, embedding_dim), h, embedding_dim)
        self.embed_b = np.zeros((num_attributes, embedding_dim))
        self.head_w = _glorot(rng, (num_attributes, embedding_dim, num_classes), embedding_dim, num_classes)
        self.head_b = np.zeros((num_attributes, num_classes))
        self._zero_grads()

    def _zero_grads(self) -> None:
        self.trunk_w_g = [np.zeros_like(w) for w in self.trunk_w]
        self.trunk_b_g = [np.zeros_like(b) for b in self.trunk_b]
        self.embed_w_g = np.zeros_like(self.embed_w)
        self.embed_b_g = np.zeros_like(self.embed_b)
        self.head_w_g = np.zeros_like(self.head_w)
        self.head_b_g = np.zeros_like(self.head_b)

    def parameters(self) -> list[tuple[str, np.ndarray]]:
        named = []
        for i, (w, b) in enumerate(zip(self.trunk_w, self.trunk_b)):
            named.append((f"trunk_w{i}", w))
            named.append((f"trunk_b{i}", b))
        named.extend(
            [("embed_w", self.embed_w), ("embed_b", self.embed_b),
             ("head_w", self.head_w), ("head_b", self.head_b)]
        )
        return named

    def _gradients(self) -> list[np.ndarray]:
        grads = []
        for wg, bg in zip(self.trunk_w_g, self.trunk_b_g):
            grads.extend([wg, bg])
        grads.extend([self.embed_w_g, self.embed_b_g, self.head_w_g, self.head_b_g])
        return grads

    def forward(self, inputs) -> tuple[np.ndarray, np.ndarray, ForwardCache]:
        """Run the net; returns (embeddings [N x A x D], logits [N x A x C],
        cache for backward)."""
        x = np.asarray(inputs, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.feature_dim:
            raise ValueError(f"inputs must be [sample x {self.feature_dim}]")
        trunk_pre, trunk_post = [], []
        act = x
        for w, b in zip(self.trunk_w, self.trunk_b):
            pre = act @ w + b
            act = np.maximum(pre, 0.0)
            trunk_pre.append(pre)
            trunk_post.append(act)
        n, h = act.shape
        emb = act @ self.embed_w.reshape(h, -1)
        emb = emb.reshape(n, self.num_attributes, self.embedding_dim) + self.embed_b
        logits = np.einsum("nad,adc->nac", emb, self.head_w) + self.head_b
        cache = ForwardCache(inputs=x, trunk_pre=trunk_pre, trunk_post=trunk_post,
                             embeddings=emb, version=self.version)
        return emb, logits, cache

    def backward(self, cache: ForwardCache, logit_grads, embedding_grads=None) -> None:
        """Accumulate parameter gradients.

        ``logit_grads`` is [N x A x C]; ``embedding_grads``, if given, is an
        extra [N x A x D] gradient applied directly to the embeddings (the
        metric-learning term differentiates against them, bypassing the
        heads).  Both flow together through the embedding layer and trunk.
        The cache must come from a forward pass on the current parameters.
        """
        if cache.version != self.version:
            raise ValueError("stale forward cache: parameters were updated since it was built")
        glogits = np.asarray(logit_grads, dtype=np.float64)
        n = cache.inputs.shape[0]
        expected = (n, self.num_attributes, self.num_classes)
        if glogits.shape != expected:
            raise ValueError(f"logit_grads must have shape {expected}")
        emb = cache.embeddings

        self.head_w_g += np.einsum("nad,nac->adc", emb, glogits)
        self.head_b_g += glogits.sum(axis=0)
        gemb = np.einsum("nac,adc->nad", glogits, self.head_w)
        if embedding_grads is not None:
            gemb = gemb + np.asarray(embedding_grads, dtype=np.float64)

        h = self.trunk_widths[-1]
        act = cache.trunk_post[-1]
        gemb_flat = gemb.reshape(n, -1)
        self.embed_w_g += (act.T @ gemb_flat).reshape(self.embed_w.shape)
        self.embed_b_g += gemb.sum(axis=0)
        gact = gemb_flat @ self.embed_w.reshape(h, -1).T

        for i in range(len(self.trunk_w) - 1, -1, -1):
            gpre = gact * (cache.trunk_pre[i] > 0.0)
            below = cache.trunk_post[i - 1] if i > 0 else cache.inputs
            self.trunk_w_g[i] += below.T @ gpre
            self.trunk_b_g[i] += gpre.sum(axis=0)
            if i > 0:
                gact = gpre @ self.trunk_w[i].T

    def sgd_update(self, learning_rate: float, weight_decay: float = 0.0) -> None:
        """theta <- theta - lr * (grad + wd * theta); zeroes the gradients."""
        if learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if weight_decay < 0.0:
            raise ValueError("weight_decay must be non-negative")
        for (_, param), grad in zip(self.parameters(), self._gradients()):
            np.subtract(param, learning_rate * (grad + weight_decay * param), out=param)
            grad.fill(0.0)
        self.version += 1

    # -- checkpointing --------------------------------------------------

    def save(self, path) -> None:
        """Binary checkpoint: magic, version header (JSON), then raw
        little-endian float64 parameter buffers in ``parameters()`` order.
        The layout is fully deterministic, so identical nets produce
        byte-identical files."""
        names_shapes = [(name, list(p.shape)) for name, p in self.parameters()]
        header = {
            "format_version": CHECKPOINT_VERSION,
            "feature_dim": self.feature_dim,
            "num_attributes": self.num_attributes,
            "trunk_widths": list(self.trunk_widths),
            "embedding_dim": self.embedding_dim,
            "num_classes": self.num_classes,
            "params": names_shapes,
        }
        blob = json.dumps(header, sort_keys=True).encode("utf-8")
        with open(path, "wb") as fh:
            fh.write(CHECKPOINT_MAGIC)
            fh.write(np.array(len(blob), dtype="<u4").tobytes())
            fh.write(blob)
            for _, p in self.parameters():
                fh.write(np.ascontiguousarray(p, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "DenseNet":
        with open(path, "rb") as fh:
            raw = fh.read()
        if raw[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
            raise DataError(f"{path}: not a checkpoint (bad magic)")
        offset = len(CHECKPOINT_MAGIC)
        header_len = int(np.frombuffer(raw, dtype="<u4", count=1, offset=offset)[0])
        offset += 4
        try:
            header = json.loads(raw[offset : offset + header_len].decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise DataError(f"{path}: corrupt checkpoint header: {exc}") from exc
        offset += header_len
        if header.get("format_version") != CHECKPOINT_VERSION:
            raise DataError(f"{path}: unsupported checkpoint version {header.get('format_version')!r}")

        net = cls.__new__(cls)
        net.feature_dim = int(header["feature_dim"])
        net.num_attributes = int(header["num_attributes"])
        net.trunk_widths = tuple(int(w) for w in header["trunk_widths"])
        net.embedding_dim = int(header["embedding_dim"])
        net.num_classes = int(header["num_classes"])
        net.version = 0
        params = {}
        for name, shape in header["params"]:
            count = int(np.prod(shape)) if shape else 1
            arr = np.frombuffer(raw, dtype="<f8", count=count, offset=offset).reshape(shape).copy()
            offset += count * 8
            params[name] = arr
        if offset != len(raw):
            raise DataError(f"{path}: trailing bytes in checkpoint")
        try:
            net.trunk_w = [params[f"trunk_w{i}"] for i in range(len(net.trunk_widths))]
            net.trunk_b = [params[f"trunk_b{i}"] for i in range(len(net.trunk_widths))]
            net.embed_w = params["embed_w"]
            net.embed_b = params["embed_b"]
            net.head_w = params["head_w"]
            net.head_b = params["head_b"]
        except KeyError as exc:
            raise DataError(f"{path}: checkpoint missing parameter {exc}") from exc
        net._zero_grads()
        return net


def _glorot(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)
