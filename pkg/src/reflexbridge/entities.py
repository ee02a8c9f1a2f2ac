"""Declaration model: entities and the engine that owns them.

An Engine instance is a self-contained universe: entity table, qualified
name index, template instantiation cache and its stats, slow-path
instrumentation counters, and the hot path's compiled-closure cache.
Instances are independent; a single instance must not be mutated from two
threads at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, auto
from typing import Optional

from .errors import NotFound, ParseError, Redefinition
from .nodes import FuncBody
from .types import (
    ARR2D,
    BUILTINS,
    InstantiationType,
    ClassType,
    TypeRef,
)


class EntityKind(Enum):
    NAMESPACE = auto()
    CLASS = auto()
    CLASS_TEMPLATE = auto()
    FUNCTION_TEMPLATE = auto()
    OVERLOAD_SET = auto()
    FUNCTION = auto()
    METHOD = auto()
    DATA_MEMBER = auto()
    INSTANTIATION = auto()


@dataclass
class Param:
    name: str
    type: TypeRef


@dataclass
class Signature:
    params: list[Param]
    return_type: TypeRef

    def param_types(self) -> tuple[TypeRef, ...]:
        return tuple(p.type for p in self.params)


@dataclass
class TemplateInfo:
    params: list[str]
    is_variadic: bool = False
    specializations: list[int] = field(default_factory=list)
    #: For a partial specialization: the argument pattern it matches,
    #: e.g. (T, Rest...) or the empty tuple for the empty-pack case.
    spec_args: Optional[tuple[TypeRef, ...]] = None


@dataclass
class Entity:
    id: int
    name: str
    qualified_name: str
    kind: EntityKind
    children: list[int] = field(default_factory=list)
    signature: Optional[Signature] = None
    body: Optional[FuncBody] = None
    template_info: Optional[TemplateInfo] = None
    # data members
    decl_type: Optional[TypeRef] = None
    initializer: object = None  # literal value, already native
    # instantiations
    origin_template: Optional[int] = None
    type_args: Optional[tuple[TypeRef, ...]] = None
    # methods / members know their owning class
    owner: Optional[int] = None

    def is_callable(self) -> bool:
        return self.kind in (
            EntityKind.FUNCTION,
            EntityKind.METHOD,
            EntityKind.FUNCTION_TEMPLATE,
            EntityKind.OVERLOAD_SET,
        ) or (self.kind is EntityKind.INSTANTIATION and self.signature is not None)


@dataclass
class InstantiationStats:
    total_instantiations: int = 0
    cache_hits: int = 0
    per_template: dict[int, int] = field(default_factory=dict)
    node_count: int = 0
    order_log: list[str] = field(default_factory=list)

    def copy(self) -> "InstantiationStats":
        return InstantiationStats(
            total_instantiations=self.total_instantiations,
            cache_hits=self.cache_hits,
            per_template=dict(self.per_template),
            node_count=self.node_count,
            order_log=list(self.order_log),
        )


@dataclass
class RuntimeCounters:
    """Slow-path instrumentation; the typed path never touches these."""

    resolutions: int = 0
    boxings: int = 0
    invocations: int = 0

    def copy(self) -> "RuntimeCounters":
        return RuntimeCounters(self.resolutions, self.boxings, self.invocations)


class Engine:
    """Owner of one translation unit's entities and caches."""

    def __init__(self) -> None:
        self._entities: dict[int, Entity] = {}
        self._by_name: dict[str, int] = {}
        self._next_id = 1
        self.instantiation_cache: dict[tuple[int, tuple[TypeRef, ...]], int] = {}
        self.stats_data = InstantiationStats()
        self.counters = RuntimeCounters()
        self.closure_cache: dict[int, object] = {}

    # -- entity table ------------------------------------------------------

    def new_entity(self, register_name: bool = True, **kw) -> Entity:
        ent = Entity(id=self._next_id, **kw)
        self._next_id += 1
        self._entities[ent.id] = ent
        if register_name:
            if ent.qualified_name in self._by_name:
                raise Redefinition(ent.qualified_name)
            self._by_name[ent.qualified_name] = ent.id
        return ent

    def rename(self, ent: Entity, qualified_name: str) -> None:
        """Re-key an entity (used when a function gains overloads)."""
        if self._by_name.get(ent.qualified_name) == ent.id:
            del self._by_name[ent.qualified_name]
        ent.qualified_name = qualified_name
        if qualified_name in self._by_name:
            raise Redefinition(qualified_name)
        self._by_name[qualified_name] = ent.id

    def bind_name(self, qualified_name: str, entity_id: int) -> None:
        self._by_name[qualified_name] = entity_id

    def entity(self, entity_id: int) -> Entity:
        return self._entities[entity_id]

    def lookup(self, qualified_name: str) -> Entity:
        eid = self._by_name.get(qualified_name)
        if eid is None:
            raise NotFound(qualified_name)
        return self._entities[eid]

    def has_name(self, qualified_name: str) -> bool:
        return qualified_name in self._by_name

    def all_entities(self) -> list[Entity]:
        return [self._entities[i] for i in sorted(self._entities)]

    def snapshot_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self._entities))

    # -- convenience -------------------------------------------------------

    def declare(self, source: str) -> list[Entity]:
        from .decl_parser import parse_translation_unit

        return parse_translation_unit(self, source)

    def parse_type(self, text: str) -> TypeRef:
        """Parse a canonical type spelling back into a TypeRef."""
        from .nodes import DUMMY_SPAN

        text = text.strip()
        if text in BUILTINS:
            return BUILTINS[text]
        if text == "arr2d":
            return ARR2D
        if "<" in text:
            head, _, rest = text.partition("<")
            if not rest.endswith(">"):
                raise ParseError(DUMMY_SPAN, f"malformed type {text!r}")
            ent = self.lookup(head.strip())
            args = _split_targs(rest[:-1])
            return InstantiationType(
                ent.id, ent.qualified_name, tuple(self.parse_type(a) for a in args)
            )
        ent = self.lookup(text)
        if ent.kind is EntityKind.INSTANTIATION:
            return InstantiationType(
                ent.origin_template,
                self.entity(ent.origin_template).qualified_name,
                ent.type_args,
            )
        return ClassType(ent.id, ent.qualified_name)

    def reset_counters(self) -> None:
        self.counters = RuntimeCounters()

    def class_members(self, class_ent: Entity) -> list[Entity]:
        return [
            self._entities[c]
            for c in class_ent.children
            if self._entities[c].kind is EntityKind.DATA_MEMBER
        ]

    def find_member(self, class_ent: Entity, name: str) -> Optional[Entity]:
        for c in class_ent.children:
            ent = self._entities[c]
            if ent.name == name:
                return ent
        return None


def _split_targs(s: str) -> list[str]:
    """Split a template-argument list on top-level commas."""
    out, depth, cur = [], 0, []
    for ch in s:
        if ch == "<":
            depth += 1
        elif ch == ">":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    tail = "".join(cur).strip()
    if tail:
        out.append(tail)
    return [a.strip() for a in out]
