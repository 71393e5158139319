"""Message-passing layers assembled from architecture strings.

A layer is described by five choices: how edges are scored (attention
kind), how weighted neighbor messages are combined (mean, max, sum), the
activation, the number of independent heads, and the hidden width. Heads
concatenate on hidden layers and average on the output layer. Scores from
kinds with trainable parameters are softmax-normalized over each node's
incoming edges; the two parameter-free kinds (const, gcn) already carry
their own scale and are used raw.
"""

import torch
import torch.nn as nn
import torch.nn.functional as F

ATTENTION_KINDS = ("gat", "gcn", "cos", "const", "sym-gat", "linear", "gene-linear")
AGGREGATORS = ("mean", "max", "sum")

ACTIVATIONS = {
    "tanh": torch.tanh,
    "sigmoid": torch.sigmoid,
    "relu": F.relu,
    "linear": lambda t: t,
    "softplus": F.softplus,
    "leaky_relu": F.leaky_relu,
    "relu6": F.relu6,
    "elu": F.elu,
}

# scored with trainable parameters, hence softmax-normalized per target node
LEARNED_KINDS = ("gat", "cos", "sym-gat", "linear", "gene-linear")


class MessagePassingLayer(nn.Module):
    """One multi-head layer: project, score edges, aggregate, activate.

    ``edge_index`` holds directed (source, target) pairs; node i gathers
    messages over edges whose target is i. Scoring uses the per-head
    projected features. ``concat=False`` averages heads instead of
    concatenating, which is the output-layer behavior.
    """

    def __init__(self, in_dim, out_dim, kind="gat", agg="sum", activation="relu",
                 heads=1, concat=True, dropout=0.0, negative_slope=0.2):
        super().__init__()
        if kind not in ATTENTION_KINDS:
            raise ValueError(f"unknown attention kind {kind!r}")
        if agg not in AGGREGATORS:
            raise ValueError(f"unknown aggregator {agg!r}")
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        self.kind = kind
        self.agg = agg
        self.activation = activation
        self.heads = heads
        self.out_dim = out_dim
        self.concat = concat
        self.dropout = dropout
        self.negative_slope = negative_slope

        self.proj = nn.Parameter(torch.empty(heads, in_dim, out_dim))
        nn.init.xavier_uniform_(self.proj)

        def head_vec():
            p = nn.Parameter(torch.empty(heads, out_dim))
            nn.init.xavier_uniform_(p)
            return p

        if kind in ("gat", "sym-gat"):
            self.att_center = head_vec()
            self.att_neighbor = head_vec()
        elif kind == "cos":
            self.att_center = head_vec()
            self.att_neighbor = head_vec()
        elif kind == "linear":
            self.att_center = head_vec()
        elif kind == "gene-linear":
            self.att_center = head_vec()
            self.att_neighbor = head_vec()
            self.att_out = head_vec()

        width = heads * out_dim if concat else out_dim
        self.bias = nn.Parameter(torch.zeros(width))

    def project(self, x):
        # (N, in) -> (N, heads, out)
        return torch.einsum("nf,hfo->nho", x, self.proj)

    def edge_scores(self, z, edge_index, num_nodes):
        """Raw per-edge, per-head correlation coefficients (E, heads)."""
        src, dst = edge_index[0], edge_index[1]
        kind = self.kind
        if kind == "const":
            return torch.ones(edge_index.shape[1], self.heads, dtype=z.dtype)
        if kind == "gcn":
            deg = torch.zeros(num_nodes, dtype=z.dtype)
            deg.index_add_(0, dst, torch.ones(edge_index.shape[1], dtype=z.dtype))
            deg_src = torch.zeros(num_nodes, dtype=z.dtype)
            deg_src.index_add_(0, src, torch.ones(edge_index.shape[1], dtype=z.dtype))
            # in symmetric graphs both counts equal the node degree
            d = (deg[dst] * deg_src[src]).clamp(min=1.0).rsqrt()
            return d.unsqueeze(1).expand(-1, self.heads)

        z_dst = z[dst]  # central node of each edge
        z_src = z[src]  # neighbor sending the message
        if kind in ("gat", "sym-gat"):
            fwd = F.leaky_relu(
                (z_dst * self.att_center).sum(-1) + (z_src * self.att_neighbor).sum(-1),
                self.negative_slope,
            )
            if kind == "gat":
                return fwd
            rev = F.leaky_relu(
                (z_src * self.att_center).sum(-1) + (z_dst * self.att_neighbor).sum(-1),
                self.negative_slope,
            )
            return fwd + rev
        if kind == "cos":
            return ((z_dst * self.att_center) * (z_src * self.att_neighbor)).sum(-1)
        if kind == "linear":
            return torch.tanh((z_dst * self.att_center).sum(-1))
        # gene-linear
        gate = torch.tanh(z_dst * self.att_center + z_src * self.att_neighbor)
        return (gate * self.att_out).sum(-1)

    def forward(self, x, edge_index):
        n = x.shape[0]
        z = self.project(x)  # (N, H, D)
        scores = self.edge_scores(z, edge_index, n)  # (E, H)

        dst = edge_index[1]
        if self.kind in LEARNED_KINDS:
            scores = _softmax_per_target(scores, dst, n)
        if self.dropout > 0:
            scores = F.dropout(scores, p=self.dropout, training=self.training)

        messages = z[edge_index[0]] * scores.unsqueeze(-1)  # (E, H, D)
        out = _aggregate(messages, dst, n, self.agg)  # (N, H, D)

        if self.concat:
            out = out.reshape(n, self.heads * self.out_dim)
        else:
            out = out.mean(dim=1)
        return ACTIVATIONS[self.activation](out + self.bias)


def _softmax_per_target(scores, dst, num_nodes):
    # numerically stable softmax grouped by target node
    peak = torch.full((num_nodes, scores.shape[1]), -torch.inf, dtype=scores.dtype)
    peak.scatter_reduce_(0, dst.unsqueeze(1).expand_as(scores), scores,
                         reduce="amax", include_self=True)
    shifted = (scores - peak[dst]).exp()
    total = torch.zeros(num_nodes, scores.shape[1], dtype=scores.dtype)
    total.index_add_(0, dst, shifted)
    return shifted / total[dst].clamp(min=1e-16)


def _aggregate(messages, dst, num_nodes, agg):
    e, h, d = messages.shape
    flat = messages.reshape(e, h * d)
    if agg == "max":
        out = torch.zeros(num_nodes, h * d, dtype=messages.dtype)
        out.scatter_reduce_(0, dst.unsqueeze(1).expand_as(flat), flat,
                            reduce="amax", include_self=False)
    else:
        out = torch.zeros(num_nodes, h * d, dtype=messages.dtype)
        out.index_add_(0, dst, flat)
        if agg == "mean":
            count = torch.zeros(num_nodes, dtype=messages.dtype)
            count.index_add_(0, dst, torch.ones(e, dtype=messages.dtype))
            out = out / count.clamp(min=1.0).unsqueeze(1)
    return out.reshape(num_nodes, h, d)


class GnnModel(nn.Module):
    """Stack of layers built from (kind, agg, activation, heads, dim) tuples.

    Hidden layers concatenate their heads; the final layer averages heads
    and its width is forced to the class count regardless of the requested
    dimension. Feature dropout is applied before every layer.
    """

    def __init__(self, layers, num_features, num_classes, dropout=0.0):
        super().__init__()
        if not layers:
            raise ValueError("need at least one layer")
        self.dropout = dropout
        built = []
        in_dim = num_features
        for i, (kind, agg, act, heads, dim) in enumerate(layers):
            last = i == len(layers) - 1
            out_dim = num_classes if last else dim
            layer = MessagePassingLayer(
                in_dim, out_dim, kind=kind, agg=agg, activation=act,
                heads=heads, concat=not last, dropout=dropout,
            )
            built.append(layer)
            in_dim = heads * out_dim
        self.layers = nn.ModuleList(built)

    def forward(self, x, edge_index):
        for layer in self.layers:
            if self.dropout > 0:
                x = F.dropout(x, p=self.dropout, training=self.training)
            x = layer(x, edge_index)
        return x


def parse_architecture(text, layers=None):
    """Canonical string -> list of (kind, agg, activation, heads, dim).

    Labels are validated against the known domains; heads and dim must be
    positive integers. ``layers`` pins the expected layer count.
    """
    chunks = [c for c in text.strip().split(";") if c]
    if layers is not None and len(chunks) != layers:
        raise ValueError(f"expected {layers} layers, got {len(chunks)}")
    out = []
    for i, chunk in enumerate(chunks):
        fields = chunk.split(",")
        if len(fields) != 5:
            raise ValueError(f"layer {i} has {len(fields)} fields (expected 5)")
        kind, agg, act, heads, dim = (f.strip() for f in fields)
        if kind not in ATTENTION_KINDS:
            raise ValueError(f"unknown attention kind {kind!r} (layer {i})")
        if agg not in AGGREGATORS:
            raise ValueError(f"unknown aggregator {agg!r} (layer {i})")
        if act not in ACTIVATIONS:
            raise ValueError(f"unknown activation {act!r} (layer {i})")
        try:
            heads_n, dim_n = int(heads), int(dim)
        except ValueError:
            raise ValueError(f"non-integer heads/dim in layer {i}: {chunk!r}") from None
        if heads_n <= 0 or dim_n <= 0:
            raise ValueError(f"heads and dim must be positive (layer {i})")
        out.append((kind, agg, act, heads_n, dim_n))
    if not out:
        raise ValueError("empty architecture string")
    return out


def build_model(text, num_features, num_classes, layers=None, dropout=0.0):
    return GnnModel(parse_architecture(text, layers), num_features, num_classes,
                    dropout=dropout)


def parameter_count(model):
    return sum(p.numel() for p in model.parameters())
