"""Toy graph-attention noise-prediction network.

One token per object.  Each block runs sequential cross-attention to
static shape tokens and dynamic geometry tokens, then multi-head graph
attention whose logits are biased by relation-edge embeddings, then an
MLP; all normalization is AdaLayerNorm conditioned on the timestep
embedding.  The network is permutation-equivariant as a function of its
row-aligned per-object inputs (the object-index encoding is an input
feature that permutes with the rows).

Everything runs in float64: the model is desk-scale and the tests check
equivariance and gradients at tight tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

from ..errors import ShapeMismatch
from ..scene import PHYSICAL_LABELS, SPATIAL_LABELS, RelationGraphs


@dataclass(frozen=True)
class TrainConfig:
    """Training and architecture hyperparameters."""

    learning_rate: float = 1e-4
    weight_decay: float = 1e-4
    batch_size: int = 16
    steps: int = 2000
    seed: int = 0
    d: int = 64
    layers: int = 2
    heads: int = 4
    n_geo: int = 8
    m_train: int = 256
    n_shape_tokens: int = 4
    d_edge: int = 16
    pos_enc_dim: int = 16
    time_enc_dim: int = 64
    desc_dim: int = 8
    T: int = 1000
    room_half_extent: float = 4.0
    geo_refresh_every: int = 10

    def __post_init__(self):
        for name in (
            "learning_rate",
            "batch_size",
            "steps",
            "d",
            "layers",
            "heads",
            "n_geo",
            "m_train",
            "T",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def sinusoidal_encoding(values: torch.Tensor, dim: int) -> torch.Tensor:
    """Fixed sinusoidal features of a scalar per row; output (..., dim)."""
    half = dim // 2
    freqs = torch.exp(
        -math.log(10000.0) * torch.arange(half, dtype=torch.float64) / max(half - 1, 1)
    )
    args = values.double()[..., None] * freqs
    return torch.cat([torch.sin(args), torch.cos(args)], dim=-1)


class AdaLayerNorm(nn.Module):
    """LayerNorm whose scale and shift come from the time embedding."""

    def __init__(self, d: int, t_dim: int):
        super().__init__()
        self.norm = nn.LayerNorm(d, elementwise_affine=False)
        self.proj = nn.Linear(t_dim, 2 * d)
        # Small but nonzero init keeps early training stable while the
        # timestep still influences the output from the first step.
        with torch.no_grad():
            self.proj.weight.mul_(0.1)
            self.proj.bias.zero_()

    def forward(self, h: torch.Tensor, temb: torch.Tensor) -> torch.Tensor:
        scale, shift = self.proj(torch.nn.functional.silu(temb)).chunk(2, dim=-1)
        return self.norm(h) * (1.0 + scale) + shift


class CrossAttention(nn.Module):
    """Each query row attends to its own bank of key/value tokens."""

    def __init__(self, d: int, heads: int):
        super().__init__()
        self.heads = heads
        self.q = nn.Linear(d, d)
        self.k = nn.Linear(d, d)
        self.v = nn.Linear(d, d)
        self.out = nn.Linear(d, d)

    def forward(self, queries: torch.Tensor, tokens: torch.Tensor) -> torch.Tensor:
        n, nq, d = queries.shape
        hd = d // self.heads
        q = self.q(queries).view(n, nq, self.heads, hd).transpose(1, 2)
        k = self.k(tokens).view(n, -1, self.heads, hd).transpose(1, 2)
        v = self.v(tokens).view(n, -1, self.heads, hd).transpose(1, 2)
        logits = q @ k.transpose(-1, -2) / math.sqrt(hd)
        attn = torch.softmax(logits, dim=-1)
        out = (attn @ v).transpose(1, 2).reshape(n, nq, d)
        return self.out(out)


class GraphAttention(nn.Module):
    """Node-to-node attention with per-head edge biases on the logits."""

    def __init__(self, d: int, heads: int):
        super().__init__()
        self.heads = heads
        self.q = nn.Linear(d, d)
        self.k = nn.Linear(d, d)
        self.v = nn.Linear(d, d)
        self.out = nn.Linear(d, d)

    def forward(self, h: torch.Tensor, edge_bias: torch.Tensor) -> torch.Tensor:
        n, d = h.shape
        hd = d // self.heads
        q = self.q(h).view(n, self.heads, hd).transpose(0, 1)
        k = self.k(h).view(n, self.heads, hd).transpose(0, 1)
        v = self.v(h).view(n, self.heads, hd).transpose(0, 1)
        logits = q @ k.transpose(-1, -2) / math.sqrt(hd) + edge_bias
        attn = torch.softmax(logits, dim=-1)
        out = (attn @ v).transpose(0, 1).reshape(n, d)
        return self.out(out)


class GeometryPerceiver(nn.Module):
    """Distills the (N, M, 4) point/distance tensor into latent tokens."""

    def __init__(self, d: int, heads: int, n_geo: int):
        super().__init__()
        self.latents = nn.Parameter(torch.randn(n_geo, d, dtype=torch.float64) * 0.02)
        self.point_proj = nn.Linear(4, d)
        self.attn = CrossAttention(d, heads)
        self.norm = nn.LayerNorm(d)
        self.mlp = nn.Sequential(nn.Linear(d, 2 * d), nn.SiLU(), nn.Linear(2 * d, d))

    def forward(self, geo: torch.Tensor) -> torch.Tensor:
        n = geo.shape[0]
        pts = self.point_proj(geo)
        lat = self.latents[None].expand(n, -1, -1)
        lat = lat + self.attn(lat, pts)
        return lat + self.mlp(self.norm(lat))


class GraphBlock(nn.Module):
    def __init__(self, d: int, heads: int, t_dim: int):
        super().__init__()
        self.ada_shape = AdaLayerNorm(d, t_dim)
        self.attn_shape = CrossAttention(d, heads)
        self.ada_geo = AdaLayerNorm(d, t_dim)
        self.attn_geo = CrossAttention(d, heads)
        self.ada_graph = AdaLayerNorm(d, t_dim)
        self.graph_attn = GraphAttention(d, heads)
        self.ada_mlp = AdaLayerNorm(d, t_dim)
        self.mlp = nn.Sequential(nn.Linear(d, 2 * d), nn.SiLU(), nn.Linear(2 * d, d))

    def forward(self, h, shape_tokens, geo_tokens, edge_bias, temb):
        h = h + self.attn_shape(self.ada_shape(h, temb)[:, None, :], shape_tokens)[:, 0]
        h = h + self.attn_geo(self.ada_geo(h, temb)[:, None, :], geo_tokens)[:, 0]
        h = h + self.graph_attn(self.ada_graph(h, temb), edge_bias)
        return h + self.mlp(self.ada_mlp(h, temb))


class EpsDenoiser(nn.Module):
    """Noise predictor eps(x_t, t, descriptors, graphs, geometry)."""

    def __init__(self, cfg: TrainConfig):
        super().__init__()
        self.cfg = cfg
        d, t_dim = cfg.d, cfg.d
        self.in_proj = nn.Linear(9 + cfg.pos_enc_dim, d)
        self.time_mlp = nn.Sequential(
            nn.Linear(cfg.time_enc_dim, t_dim), nn.SiLU(), nn.Linear(t_dim, t_dim)
        )
        self.spatial_emb = nn.Embedding(len(SPATIAL_LABELS), cfg.d_edge)
        self.physical_emb = nn.Embedding(len(PHYSICAL_LABELS), cfg.d_edge)
        self.edge_proj = nn.Linear(2 * cfg.d_edge, cfg.d_edge)
        self.edge_bias = nn.Linear(cfg.d_edge, cfg.heads)
        self.shape_proj = nn.Linear(cfg.desc_dim, cfg.n_shape_tokens * d)
        self.perceiver = GeometryPerceiver(d, cfg.heads, cfg.n_geo)
        self.blocks = nn.ModuleList(
            [GraphBlock(d, cfg.heads, t_dim) for _ in range(cfg.layers)]
        )
        self.out_norm = AdaLayerNorm(d, t_dim)
        self.out_proj = nn.Linear(d, 9)
        self.double()

    def edge_features(self, graphs: RelationGraphs) -> torch.Tensor:
        sp = torch.as_tensor(graphs.spatial)
        ph = torch.as_tensor(graphs.physical)
        e = torch.cat([self.spatial_emb(sp), self.physical_emb(ph)], dim=-1)
        return self.edge_proj(e)

    def forward(
        self,
        x: torch.Tensor,
        t: int,
        ids: torch.Tensor,
        desc: torch.Tensor,
        graphs: RelationGraphs,
        geo: torch.Tensor,
    ) -> torch.Tensor:
        n = x.shape[0]
        temb = self.time_mlp(
            sinusoidal_encoding(torch.tensor(float(t)), self.cfg.time_enc_dim)
        )
        pos = sinusoidal_encoding(ids.double(), self.cfg.pos_enc_dim)
        h = self.in_proj(torch.cat([x, pos], dim=-1))
        shape_tokens = self.shape_proj(desc).view(n, self.cfg.n_shape_tokens, self.cfg.d)
        geo_tokens = self.perceiver(geo)
        bias = self.edge_bias(self.edge_features(graphs)).permute(2, 0, 1)
        for block in self.blocks:
            h = block(h, shape_tokens, geo_tokens, bias, temb)
        return self.out_proj(self.out_norm(h, temb))

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())


def predict_eps(
    model: EpsDenoiser,
    x: np.ndarray,
    t: int,
    shape_descs: np.ndarray,
    graphs: RelationGraphs,
    geo: np.ndarray,
    ids: np.ndarray | None = None,
) -> np.ndarray:
    """Numpy-facing forward pass with shape validation."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if x.shape != (n, 9):
        raise ShapeMismatch(f"state must be (N, 9), got {x.shape}")
    shape_descs = np.asarray(shape_descs, dtype=np.float64)
    if shape_descs.shape != (n, model.cfg.desc_dim):
        raise ShapeMismatch(f"descriptors must be (N, {model.cfg.desc_dim})")
    if graphs.n != n:
        raise ShapeMismatch("graph size does not match state")
    geo = np.asarray(geo, dtype=np.float64)
    if geo.ndim != 3 or geo.shape[0] != n or geo.shape[2] != 4:
        raise ShapeMismatch(f"geometry features must be (N, M, 4), got {geo.shape}")
    if ids is None:
        ids = np.arange(n)
    with torch.no_grad():
        out = model(
            torch.as_tensor(x),
            t,
            torch.as_tensor(np.asarray(ids)),
            torch.as_tensor(shape_descs),
            graphs,
            torch.as_tensor(geo),
        )
    return out.numpy()
