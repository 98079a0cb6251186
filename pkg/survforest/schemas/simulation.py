"""
Simulation configuration schemas.

A SubspaceModel is a small binary tree over the covariates whose leaves
hold the coefficients of the linear predictor Y in that subspace. Event
times are Weibull with the configured shape and scale exp(Y).

Flat encoding (one key per node)::

    sim.model.node.0=product;features=0,2;offsets=7,-10;left=1;right=2
    sim.model.node.1=leaf;coef=0.2,-0.1,0.5
    sim.model.node.2=leaf;coef=0.3,0.1,-0.3
"""

from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from survforest.core.config import settings
from survforest.core.flatconfig import flatten, section


class NodeKind(str, Enum):
    """Subspace tree node kinds."""

    THRESHOLD = "threshold"  # x[feature] <= cut goes left
    PRODUCT = "product"  # (x[f1] + o1) * (x[f2] + o2) > 0 goes left
    LEAF = "leaf"


def _floats(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _fmt(values) -> str:
    return ",".join(repr(float(v)) for v in values)


class SubspaceNode(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: NodeKind
    feature: Optional[int] = Field(default=None, ge=0)
    cut: Optional[float] = None
    features: Optional[Tuple[int, int]] = None
    offsets: Optional[Tuple[float, float]] = None
    left: Optional[int] = None
    right: Optional[int] = None
    coef: Optional[List[float]] = None
    intercept: float = 0.0

    @model_validator(mode="after")
    def _check_kind(self) -> "SubspaceNode":
        if self.kind == NodeKind.LEAF:
            if not self.coef:
                raise ValueError("leaf nodes need coefficients")
            if self.left is not None or self.right is not None:
                raise ValueError("leaf nodes have no children")
            return self
        if self.left is None or self.right is None:
            raise ValueError(f"{self.kind.value} nodes need left and right children")
        if self.kind == NodeKind.THRESHOLD and (self.feature is None or self.cut is None):
            raise ValueError("threshold nodes need feature and cut")
        if self.kind == NodeKind.PRODUCT and (self.features is None or self.offsets is None):
            raise ValueError("product nodes need features and offsets")
        return self

    def goes_left(self, X: np.ndarray) -> np.ndarray:
        if self.kind == NodeKind.THRESHOLD:
            return X[:, self.feature] <= self.cut
        (f1, f2), (o1, o2) = self.features, self.offsets
        return (X[:, f1] + o1) * (X[:, f2] + o2) > 0

    def used_features(self) -> List[int]:
        if self.kind == NodeKind.THRESHOLD:
            return [self.feature]
        if self.kind == NodeKind.PRODUCT:
            return list(self.features)
        return []

    def to_flat(self) -> str:
        if self.kind == NodeKind.LEAF:
            return f"leaf;coef={_fmt(self.coef)};intercept={self.intercept!r}"
        if self.kind == NodeKind.THRESHOLD:
            return f"threshold;feature={self.feature};cut={self.cut!r};left={self.left};right={self.right}"
        return (
            f"product;features={self.features[0]},{self.features[1]};"
            f"offsets={_fmt(self.offsets)};left={self.left};right={self.right}"
        )

    @classmethod
    def from_flat(cls, text: str) -> "SubspaceNode":
        kind, *pairs = [p.strip() for p in text.split(";") if p.strip()]
        fields: Dict[str, object] = {"kind": kind}
        for pair in pairs:
            key, _, value = pair.partition("=")
            key = key.strip()
            if key in ("coef",):
                fields[key] = _floats(value)
            elif key == "offsets":
                fields[key] = tuple(_floats(value))
            elif key == "features":
                fields[key] = tuple(int(v) for v in value.split(","))
            else:
                fields[key] = value.strip()
        return cls.model_validate(fields)


class SubspaceModel(BaseModel):
    """
    Partition tree over covariates; node 0 is the root and children
    follow their parent in node order.

    Subspace ids number the leaves in node-index order.
    """

    model_config = ConfigDict(frozen=True)

    nodes: List[SubspaceNode]

    @model_validator(mode="after")
    def _check_tree(self) -> "SubspaceModel":
        size = len(self.nodes)
        if size == 0:
            raise ValueError("subspace model needs at least one node")
        referenced = [0]
        for i, node in enumerate(self.nodes):
            if node.kind != NodeKind.LEAF:
                if min(node.left, node.right) <= i:
                    raise ValueError(f"children of node {i} must have larger indices")
                referenced.extend([node.left, node.right])
        if sorted(referenced) != list(range(size)):
            raise ValueError("subspace nodes must form a single tree rooted at node 0")
        widths = {len(node.coef) for node in self.nodes if node.kind == NodeKind.LEAF}
        if len(widths) != 1:
            raise ValueError("every leaf needs the same number of coefficients")
        return self

    @property
    def leaf_indices(self) -> List[int]:
        return [i for i, node in enumerate(self.nodes) if node.kind == NodeKind.LEAF]

    @property
    def n_subspaces(self) -> int:
        return len(self.leaf_indices)

    @property
    def n_coefficients(self) -> int:
        return len(self.nodes[self.leaf_indices[0]].coef)

    @property
    def partition_features(self) -> List[int]:
        return sorted({f for node in self.nodes for f in node.used_features()})

    def assign(self, X: np.ndarray) -> np.ndarray:
        """Subspace id of every row of ``X``."""
        X = np.asarray(X, dtype=np.float64)
        node_of = np.zeros(X.shape[0], dtype=np.intp)
        for idx, node in enumerate(self.nodes):
            if node.kind == NodeKind.LEAF:
                continue
            rows = np.flatnonzero(node_of == idx)
            if rows.size == 0:
                continue
            left = node.goes_left(X[rows])
            node_of[rows] = np.where(left, node.left, node.right)
        leaf_ids = {leaf: k for k, leaf in enumerate(self.leaf_indices)}
        return np.array([leaf_ids[i] for i in node_of], dtype=np.intp)

    def linear_predictor(self, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(Y, subspace id) for every row of ``X``."""
        X = np.asarray(X, dtype=np.float64)
        subspace = self.assign(X)
        coef = np.array([self.nodes[i].coef for i in self.leaf_indices], dtype=np.float64)
        intercept = np.array([self.nodes[i].intercept for i in self.leaf_indices], dtype=np.float64)
        y = np.einsum("ij,ij->i", X, coef[subspace]) + intercept[subspace]
        return y, subspace

    def to_flat(self) -> Dict[str, str]:
        return {f"node.{i}": node.to_flat() for i, node in enumerate(self.nodes)}

    @classmethod
    def from_flat(cls, flat: Dict[str, str]) -> "SubspaceModel":
        nodes = section(flat, "node")
        try:
            order = sorted(nodes, key=int)
        except ValueError as e:
            raise ValueError(f"node keys must be integers: {sorted(nodes)}") from e
        if [int(k) for k in order] != list(range(len(order))):
            raise ValueError("node keys must be 0..k-1")
        return cls(nodes=[SubspaceNode.from_flat(nodes[k]) for k in order])


class CensoringKind(str, Enum):
    NONE = "none"
    UNIFORM = "uniform"  # C ~ Uniform(0, c_max)
    DEPENDENT = "dependent"  # C ~ Weibull(shape, scale = exp(intercept + slope * Y))


class CensoringSpec(BaseModel):
    """
    Censoring mechanism.

    Uniform censoring without ``c_max`` is calibrated by bisection to hit
    ``target_fraction``.
    """

    model_config = ConfigDict(frozen=True)

    kind: CensoringKind = CensoringKind.UNIFORM
    c_max: Optional[float] = Field(default=None, gt=0)
    target_fraction: float = Field(default=settings.DEFAULT_TARGET_CENSORING, gt=0, lt=1)
    shape: float = Field(default=2.0, gt=0)
    intercept: float = 0.0
    slope: float = 1.0


class SimConfig(BaseModel):
    """Synthetic survival data generator configuration."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    p: int = Field(ge=1)
    covariate_low: float = -15.0
    covariate_high: float = 15.0
    weibull_shape: float = Field(default=2.0, gt=0)
    model: SubspaceModel
    censoring: CensoringSpec = Field(default_factory=CensoringSpec)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_dimensions(self) -> "SimConfig":
        if not self.covariate_low < self.covariate_high:
            raise ValueError("covariate_low must be below covariate_high")
        if self.model.n_coefficients != self.p:
            raise ValueError(f"leaf coefficients have length {self.model.n_coefficients}, expected p={self.p}")
        if any(f >= self.p for f in self.model.partition_features):
            raise ValueError("partition uses a feature index >= p")
        return self

    def to_flat(self) -> Dict[str, str]:
        """Flat ``sim.*`` keys; inverse of :meth:`from_flat`."""
        body = self.model_dump(mode="json", exclude={"model"})
        flat = flatten(body, "sim")
        flat.update({f"sim.model.{k}": v for k, v in self.model.to_flat().items()})
        return flat

    @classmethod
    def from_flat(cls, flat: Dict[str, str]) -> "SimConfig":
        """Build from flat keys; ``sim.preset`` seeds the values that follow."""
        from survforest.core.flatconfig import unflatten

        sim = section(flat, "sim")
        preset = sim.pop("preset", None)
        base: Dict[str, str] = {}
        if preset:
            from survforest.services.simgen_service import preset_config

            base = section(preset_config(preset).to_flat(), "sim")
        if any(k.startswith("model.") for k in sim):
            base = {k: v for k, v in base.items() if not k.startswith("model.")}
        base.update(sim)
        model_keys = section(base, "model")
        body = unflatten({k: v for k, v in base.items() if not k.startswith("model.")})
        body["model"] = SubspaceModel.from_flat(model_keys)
        return cls.model_validate(body)
