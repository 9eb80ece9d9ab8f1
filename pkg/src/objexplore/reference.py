"""Static inputs: reference priors, action specs, edge translations, object catalog.

All files are TOML. Numeric keys carry a unit suffix (``density_mean_kg_m3``,
``volume_sd_m3``, ...) and are converted on load to the canonical units used
everywhere else in the package: kPa, kg/m^3, cm^3 and grams.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import tomli_w

CATEGORY = "Category"
MATERIAL = "Material"
ELASTICITY = "Elasticity"
DENSITY = "Density"
VOLUME = "Volume"

CATEGORICAL_NODES = (CATEGORY, MATERIAL)
CONTINUOUS_NODES = (ELASTICITY, DENSITY, VOLUME)
NODES = CATEGORICAL_NODES + CONTINUOUS_NODES

# Undirected tree; the first node of each pair is the parent.
TREE_EDGES = (
    (CATEGORY, MATERIAL),
    (CATEGORY, VOLUME),
    (MATERIAL, DENSITY),
    (MATERIAL, ELASTICITY),
)

# Categorical node whose labels index the mixture components of a continuous node.
COMPONENT_LABELS = {VOLUME: CATEGORY, DENSITY: MATERIAL, ELASTICITY: MATERIAL}

N_CATEGORIES = 10
N_MATERIALS = 8

ENV_CONFIG_DIR = "OBJEXPLORE_CONFIG_DIR"

# quantity -> {unit suffix: factor to the canonical unit}
UNITS = {
    "volume": {"cm3": 1.0, "ml": 1.0, "l": 1e3, "m3": 1e6},
    "density": {"kg_m3": 1.0, "g_cm3": 1e3},
    "elasticity": {"kpa": 1.0, "pa": 1e-3, "mpa": 1e3},
    "mass": {"g": 1.0, "kg": 1e3},
}
CANONICAL_UNIT = {"volume": "cm3", "density": "kg_m3", "elasticity": "kpa", "mass": "g"}
NODE_QUANTITY = {VOLUME: "volume", DENSITY: "density", ELASTICITY: "elasticity"}

ROW_SUM_TOL = 1e-9
MASS_REL_TOL = 1e-3


class ValidationError(ValueError):
    """Raised when an input file violates its schema or invariants."""


def _read_toml(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, "rb") as fh:
        try:
            return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ValidationError(f"{path}: {exc}") from exc


def _quantity(entry: dict, stem: str, quantity: str, where: str, required=True):
    """Read ``<stem>_<unit>`` from ``entry`` and convert to the canonical unit."""
    found = [
        (unit, factor)
        for unit, factor in UNITS[quantity].items()
        if f"{stem}_{unit}" in entry
    ]
    if not found:
        if required:
            units = ", ".join(f"{stem}_{u}" for u in UNITS[quantity])
            raise ValidationError(f"{where}: missing field (one of {units})")
        return None
    if len(found) > 1:
        raise ValidationError(f"{where}: {stem} given in more than one unit")
    unit, factor = found[0]
    value = entry[f"{stem}_{unit}"]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{where}: {stem}_{unit} must be a number")
    return float(value) * factor


def default_data_dir() -> Path:
    """Directory holding the default TOML files.

    ``$OBJEXPLORE_CONFIG_DIR`` overrides the copies shipped with the package.
    """
    env = os.environ.get(ENV_CONFIG_DIR)
    if env:
        return Path(env)
    return packaged_data_dir()


def packaged_data_dir() -> Path:
    return Path(str(resources.files("objexplore") / "data"))


def _default(name: str, path) -> Path:
    return Path(path) if path is not None else default_data_dir() / name


def check_row_stochastic(matrix, name="matrix", tol=ROW_SUM_TOL) -> np.ndarray:
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2:
        raise ValidationError(f"{name}: expected a 2-D matrix")
    if np.any(m < 0) or not np.all(np.isfinite(m)):
        raise ValidationError(f"{name}: entries must be finite and non-negative")
    sums = m.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
    if bad.size:
        raise ValidationError(
            f"{name}: row {bad[0]} sums to {sums[bad[0]]:.12g}, expected 1"
        )
    return m


# ---------------------------------------------------------------------------
# Reference tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReferenceTables:
    """Per-label (mean, sd) reference values in canonical units.

    The three ``*_by_*`` arrays have shape (n_labels, 2) with columns mean, sd,
    rows in label order.
    """

    category_labels: tuple
    material_labels: tuple
    volume_by_category: np.ndarray
    density_by_material: np.ndarray
    elasticity_by_material: np.ndarray

    def __post_init__(self):
        if len(self.category_labels) != N_CATEGORIES:
            raise ValidationError(
                f"expected {N_CATEGORIES} categories, got {len(self.category_labels)}"
            )
        if len(self.material_labels) != N_MATERIALS:
            raise ValidationError(
                f"expected {N_MATERIALS} materials, got {len(self.material_labels)}"
            )
        for name, labels in (
            ("category", self.category_labels),
            ("material", self.material_labels),
        ):
            if len(set(labels)) != len(labels):
                raise ValidationError(f"duplicate {name} label")
        for name, table, n in (
            ("volume_by_category", self.volume_by_category, N_CATEGORIES),
            ("density_by_material", self.density_by_material, N_MATERIALS),
            ("elasticity_by_material", self.elasticity_by_material, N_MATERIALS),
        ):
            arr = np.asarray(table, dtype=float)
            if arr.shape != (n, 2):
                raise ValidationError(f"{name}: expected shape ({n}, 2)")
            if np.any(arr[:, 1] <= 0):
                i = int(np.flatnonzero(arr[:, 1] <= 0)[0])
                raise ValidationError(f"{name}: sd of row {i} must be > 0")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def labels(self, node: str) -> tuple:
        """Labels of a categorical node, or the component labels of a continuous one."""
        node = COMPONENT_LABELS.get(node, node)
        if node == CATEGORY:
            return self.category_labels
        if node == MATERIAL:
            return self.material_labels
        raise KeyError(node)

    def components(self, node: str) -> np.ndarray:
        """(n, 2) array of reference (mean, sd) for a continuous node."""
        return {
            VOLUME: self.volume_by_category,
            DENSITY: self.density_by_material,
            ELASTICITY: self.elasticity_by_material,
        }[node]

    def cardinality(self, node: str) -> int:
        return len(self.labels(node))

    def lookup(self, node: str, label: str) -> tuple:
        """Reference (mean, sd) of one component, e.g. ``lookup("Density", "metal")``."""
        i = self.labels(node).index(label)
        mean, sd = self.components(node)[i]
        return float(mean), float(sd)


def load_reference_tables(path=None) -> ReferenceTables:
    """Load the reference volume, density and elasticity tables."""
    raw = _read_toml(_default("priors.toml", path))
    categories = raw.get("category")
    materials = raw.get("material")
    if not isinstance(categories, list):
        raise ValidationError("missing [[category]] entries")
    if not isinstance(materials, list):
        raise ValidationError("missing [[material]] entries")
    if len(categories) != N_CATEGORIES:
        raise ValidationError(
            f"expected {N_CATEGORIES} categories, got {len(categories)}"
        )
    if len(materials) != N_MATERIALS:
        raise ValidationError(f"expected {N_MATERIALS} materials, got {len(materials)}")

    def label(entry, kind, i):
        name = entry.get("name")
        if not isinstance(name, str) or not name:
            raise ValidationError(f"{kind}[{i}]: missing label 'name'")
        return name

    cat_labels = tuple(label(e, "category", i) for i, e in enumerate(categories))
    mat_labels = tuple(label(e, "material", i) for i, e in enumerate(materials))
    volume = [
        [
            _quantity(e, "volume_mean", "volume", f"category {n}"),
            _quantity(e, "volume_sd", "volume", f"category {n}"),
        ]
        for n, e in zip(cat_labels, categories)
    ]
    density = [
        [
            _quantity(e, "density_mean", "density", f"material {n}"),
            _quantity(e, "density_sd", "density", f"material {n}"),
        ]
        for n, e in zip(mat_labels, materials)
    ]
    elasticity = [
        [
            _quantity(e, "elasticity_mean", "elasticity", f"material {n}"),
            _quantity(e, "elasticity_sd", "elasticity", f"material {n}"),
        ]
        for n, e in zip(mat_labels, materials)
    ]
    return ReferenceTables(
        category_labels=cat_labels,
        material_labels=mat_labels,
        volume_by_category=np.array(volume),
        density_by_material=np.array(density),
        elasticity_by_material=np.array(elasticity),
    )


def dump_reference_tables(tables: ReferenceTables, path) -> None:
    """Write ``tables`` in the same schema :func:`load_reference_tables` reads."""
    doc = {
        "category": [
            {"name": n, "volume_mean_cm3": float(m), "volume_sd_cm3": float(s)}
            for n, (m, s) in zip(tables.category_labels, tables.volume_by_category)
        ],
        "material": [
            {
                "name": n,
                "density_mean_kg_m3": float(d[0]),
                "density_sd_kg_m3": float(d[1]),
                "elasticity_mean_kpa": float(e[0]),
                "elasticity_sd_kpa": float(e[1]),
            }
            for n, d, e in zip(
                tables.material_labels,
                tables.density_by_material,
                tables.elasticity_by_material,
            )
        ],
    }
    with open(path, "wb") as fh:
        tomli_w.dump(doc, fh)


# ---------------------------------------------------------------------------
# Confusion matrices and actions
# ---------------------------------------------------------------------------


def build_default_confusion(accuracy: float, cardinality: int) -> np.ndarray:
    """Diagonal-plus-uniform confusion matrix with the given average accuracy.

    Rows are the true label, columns the measured label.
    """
    if not 0.0 <= accuracy <= 1.0:
        raise ValueError(f"accuracy must lie in [0, 1], got {accuracy}")
    if cardinality < 2:
        raise ValueError(f"cardinality must be >= 2, got {cardinality}")
    off = (1.0 - accuracy) / (cardinality - 1)
    conf = np.full((cardinality, cardinality), off)
    np.fill_diagonal(conf, accuracy)
    return conf


@dataclass(frozen=True)
class ActionSpec:
    """One exploratory action.

    ``sigma`` is the measurement SD in target-node units. ``observable`` names
    the raw quantity a continuous action reads off the object (``"mass"`` for
    weighing, which is converted to a density likelihood) and
    ``observable_sigma`` its SD in canonical units of that quantity.
    """

    name: str
    target_node: str
    kind: str
    confusion: Optional[np.ndarray] = None
    sigma: Optional[float] = None
    censor_threshold: Optional[float] = None
    observable: Optional[str] = None
    observable_sigma: Optional[float] = None

    def __post_init__(self):
        if self.kind == "categorical":
            if self.target_node not in CATEGORICAL_NODES:
                raise ValidationError(
                    f"action {self.name}: categorical action needs a categorical target"
                )
            if self.confusion is None:
                raise ValidationError(f"action {self.name}: missing confusion matrix")
            conf = check_row_stochastic(self.confusion, f"action {self.name} confusion")
            if conf.shape[0] != conf.shape[1]:
                raise ValidationError(f"action {self.name}: confusion must be square")
            conf = conf.copy()
            conf.setflags(write=False)
            object.__setattr__(self, "confusion", conf)
        elif self.kind == "continuous":
            if self.target_node not in CONTINUOUS_NODES:
                raise ValidationError(
                    f"action {self.name}: continuous action needs a continuous target"
                )
            if self.sigma is None or not self.sigma > 0:
                raise ValidationError(f"action {self.name}: sigma must be > 0")
            if self.observable is None:
                object.__setattr__(
                    self, "observable", NODE_QUANTITY[self.target_node]
                )
            if self.observable not in UNITS:
                raise ValidationError(
                    f"action {self.name}: unknown observable {self.observable!r}"
                )
            if self.observable != NODE_QUANTITY[self.target_node] and not (
                self.observable_sigma and self.observable_sigma > 0
            ):
                raise ValidationError(
                    f"action {self.name}: observable_sigma must be > 0"
                )
        else:
            raise ValidationError(
                f"action {self.name}: kind must be 'categorical' or 'continuous'"
            )

    @property
    def is_categorical(self) -> bool:
        return self.kind == "categorical"


def load_action_specs(path=None, tables: Optional[ReferenceTables] = None) -> list:
    if tables is None:
        tables = load_reference_tables()
    raw = _read_toml(_default("actions.toml", path))
    entries = raw.get("action")
    if not isinstance(entries, list) or not entries:
        raise ValidationError("missing [[action]] entries")
    actions = []
    for i, e in enumerate(entries):
        name = e.get("name")
        if not isinstance(name, str):
            raise ValidationError(f"action[{i}]: missing 'name'")
        node = e.get("target_node")
        if node not in NODES:
            raise ValidationError(f"action {name}: unknown target_node {node!r}")
        kind = e.get("kind")
        if kind == "categorical":
            k = tables.cardinality(node)
            if "confusion" in e:
                conf = np.asarray(e["confusion"], dtype=float)
            elif "accuracy" in e:
                conf = build_default_confusion(float(e["accuracy"]), k)
            else:
                raise ValidationError(f"action {name}: need 'accuracy' or 'confusion'")
            if conf.shape != (k, k):
                raise ValidationError(
                    f"action {name}: confusion must be {k}x{k} for node {node}"
                )
            actions.append(ActionSpec(name, node, kind, confusion=conf))
        else:
            quantity = NODE_QUANTITY.get(node, "volume")
            observable = e.get("observable", quantity)
            obs_sigma = None
            if observable in UNITS and observable != quantity:
                obs_sigma = _quantity(e, "observable_sigma", observable, f"action {name}")
            actions.append(
                ActionSpec(
                    name,
                    node,
                    kind,
                    sigma=_quantity(e, "sigma", quantity, f"action {name}"),
                    censor_threshold=_quantity(
                        e, "censor_threshold", quantity, f"action {name}", required=False
                    ),
                    observable=observable,
                    observable_sigma=obs_sigma,
                )
            )
    names = [a.name for a in actions]
    if len(set(names)) != len(names):
        raise ValidationError("duplicate action name")
    return actions


# ---------------------------------------------------------------------------
# Edge translations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EdgeTranslation:
    """Directed translation from ``source`` label space to ``target`` label space."""

    source: str
    target: str
    matrix: np.ndarray

    @property
    def edge(self) -> tuple:
        return (self.source, self.target)


def load_edge_translations(path=None, tables: Optional[ReferenceTables] = None) -> list:
    """Load translations for every direction of every tree edge.

    Directions not listed in the file get the row-normalized transpose of the
    opposite direction.
    """
    if tables is None:
        tables = load_reference_tables()
    raw = _read_toml(_default("edges.toml", path))
    entries = raw.get("edge")
    if not isinstance(entries, list):
        raise ValidationError("missing [[edge]] entries")
    undirected = {frozenset(e) for e in TREE_EDGES}
    given = {}
    for i, e in enumerate(entries):
        src, dst = e.get("source"), e.get("target")
        if frozenset((src, dst)) not in undirected or src == dst:
            raise ValidationError(f"edge[{i}]: {src}->{dst} is not a network edge")
        shape = (tables.cardinality(src), tables.cardinality(dst))
        mat = e.get("matrix")
        if mat == "identity":
            if shape[0] != shape[1]:
                raise ValidationError(f"edge {src}->{dst}: identity needs a square map")
            mat = np.eye(shape[0])
        mat = check_row_stochastic(mat, f"edge {src}->{dst}")
        if mat.shape != shape:
            raise ValidationError(
                f"edge {src}->{dst}: expected shape {shape}, got {mat.shape}"
            )
        if (src, dst) in given:
            raise ValidationError(f"edge {src}->{dst} listed twice")
        given[(src, dst)] = mat

    out = []
    for a, b in TREE_EDGES:
        if (a, b) not in given and (b, a) not in given:
            raise ValidationError(f"missing edge {a}-{b}")
        for src, dst in ((a, b), (b, a)):
            mat = given.get((src, dst))
            if mat is None:
                mat = given[(dst, src)].T.copy()
                sums = mat.sum(axis=1, keepdims=True)
                if np.any(sums <= 0):
                    raise ValidationError(
                        f"edge {dst}->{src}: a target label receives no mass; "
                        f"give {src}->{dst} explicitly"
                    )
                mat = mat / sums
            mat.setflags(write=False)
            out.append(EdgeTranslation(src, dst, mat))
    return out


# ---------------------------------------------------------------------------
# Object catalog
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroundTruthObject:
    """True properties of a simulated object (canonical units)."""

    name: str
    true_category: str
    true_material: str
    elasticity: float
    density: float
    volume: float
    mass: float

    def value(self, quantity: str) -> float:
        return {
            "elasticity": self.elasticity,
            "density": self.density,
            "volume": self.volume,
            "mass": self.mass,
        }[quantity]


def load_object_catalog(path=None, tables: Optional[ReferenceTables] = None) -> list:
    if tables is None:
        tables = load_reference_tables()
    raw = _read_toml(_default("catalog.toml", path))
    entries = raw.get("object")
    if not isinstance(entries, list):
        raise ValidationError("missing [[object]] entries")
    objects = []
    for i, e in enumerate(entries):
        name = e.get("name")
        if not isinstance(name, str):
            raise ValidationError(f"object[{i}]: missing 'name'")
        cat, mat = e.get("category"), e.get("material")
        if cat not in tables.category_labels:
            raise ValidationError(f"object {name}: unknown category {cat!r}")
        if mat not in tables.material_labels:
            raise ValidationError(f"object {name}: unknown material {mat!r}")
        where = f"object {name}"
        obj = GroundTruthObject(
            name=name,
            true_category=cat,
            true_material=mat,
            elasticity=_quantity(e, "elasticity", "elasticity", where),
            density=_quantity(e, "density", "density", where),
            volume=_quantity(e, "volume", "volume", where),
            mass=_quantity(e, "mass", "mass", where),
        )
        validate_object(obj)
        objects.append(obj)
    if len({o.name for o in objects}) != len(objects):
        raise ValidationError("duplicate object name")
    return objects


def validate_object(obj: GroundTruthObject) -> None:
    for attr in ("elasticity", "density", "volume", "mass"):
        if not getattr(obj, attr) > 0:
            raise ValidationError(f"object {obj.name}: {attr} must be > 0")
    expected = obj.density * obj.volume / 1000.0  # kg/m^3 * cm^3 -> g
    if abs(obj.mass - expected) > MASS_REL_TOL * expected:
        raise ValidationError(
            f"object {obj.name}: mass {obj.mass:g} g inconsistent with "
            f"density x volume = {expected:g} g"
        )


@dataclass(frozen=True)
class ReferenceData:
    """Everything loaded from one configuration directory."""

    tables: ReferenceTables
    actions: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    catalog: list = field(default_factory=list)

    def action(self, name: str) -> ActionSpec:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(f"unknown action {name!r}")

    def object(self, name: str) -> GroundTruthObject:
        for o in self.catalog:
            if o.name == name:
                return o
        raise KeyError(f"unknown object {name!r}")


def load_reference_data(config_dir=None) -> ReferenceData:
    """Load priors, actions, edges and catalog from one directory.

    Files absent from ``config_dir`` fall back to the packaged defaults.
    """
    d = Path(config_dir) if config_dir is not None else default_data_dir()
    if not d.is_dir():
        raise ValidationError(f"config directory {d} does not exist")

    def pick(name):
        return d / name if (d / name).exists() else packaged_data_dir() / name

    tables = load_reference_tables(pick("priors.toml"))
    return ReferenceData(
        tables=tables,
        actions=load_action_specs(pick("actions.toml"), tables),
        edges=load_edge_translations(pick("edges.toml"), tables),
        catalog=load_object_catalog(pick("catalog.toml"), tables),
    )


def select_objects(catalog: Sequence[GroundTruthObject], names=None) -> list:
    if not names:
        return list(catalog)
    by_name = {o.name: o for o in catalog}
    missing = [n for n in names if n not in by_name]
    if missing:
        raise ValidationError(f"unknown object(s): {', '.join(missing)}")
    return [by_name[n] for n in names]
