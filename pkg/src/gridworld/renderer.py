"""
Детерминированный рендерер состояний Gridworld в многоканальный тензор H×W×C
и точный обратный декодер (оракул)

Раскладка сетки:
    строка 0 - "лимбо": объект без фактов in рисуется в столбце со своим номером;
    строки ниже - карманы контейнеров, которые не комнаты (агент, сундук, дверь);
    оставшиеся строки делятся на вертикальные полосы по одной на комнату.
Регионы не пересекаются, внутри региона объекты занимают разные клетки.
"""

import math
from dataclasses import dataclass

import numpy as np

from logic.core import ClosedState, PropositionIndex
from utils.errors import MalformedObservationError, ShapeMismatchError

CONTAINMENT = "in"
ROOM_TYPE = "room"

LIMBO = -1
UNUSED = -2


@dataclass(frozen=True)
class Region:
    container: str
    cells: np.ndarray  # (k, 2): строка, столбец


class GridRenderer:
    """Рендерер, привязанный к индексу пропозиций и размеру сетки"""

    def __init__(self, index: PropositionIndex, height: int = 16, width: int = 16):
        self.index = index
        self.height = height
        self.width = width
        self.objects = index.objects
        self.n_objects = len(self.objects)

        in_id = index.predicate_id(CONTAINMENT)
        container_type = index.predicates[in_id].params[1][1]
        containers = index.objects_of_type(container_type)
        rooms = [c for c in containers if index.types.conforms(c.type_name, ROOM_TYPE)]
        pockets = [c for c in containers if c not in rooms]
        self.regions = self._layout(pockets, rooms)

        self.region_map = np.full((height, width), UNUSED, dtype=np.int64)
        self.region_map[0, :] = LIMBO
        for r, region in enumerate(self.regions):
            self.region_map[region.cells[:, 0], region.cells[:, 1]] = r

        # in(o, c) <-> (объект, регион)
        region_of_container = {region.container: r for r, region in enumerate(self.regions)}
        self._in_region: dict[int, tuple[int, int]] = {}
        self._in_prop: dict[tuple[int, int], int] = {}
        # остальные пропозиции <-> (канал, объект-носитель)
        self.channel_names: list[str] = [o.name for o in self.objects]
        self._channel_of: dict[int, tuple[int, int]] = {}
        self._prop_of_channel: dict[tuple[int, int], int] = {}

        for i in range(index.n):
            prop = index.inverse(i)
            predicate = index.predicates[prop.predicate]
            subject = prop.args[0] if prop.args else None
            if prop.predicate == in_id:
                region = region_of_container[self.objects[prop.args[1]].name]
                self._in_region[i] = (subject, region)
                self._in_prop[(subject, region)] = i
                continue
            if subject is None:
                raise ShapeMismatchError(f"predicate {predicate.name} has no argument to draw on")
            tail = ",".join(self.objects[a].name for a in prop.args[1:])
            name = f"{predicate.name}:{tail}" if tail else predicate.name
            if name not in self.channel_names:
                self.channel_names.append(name)
            channel = self.channel_names.index(name)
            self._channel_of[i] = (channel, subject)
            self._prop_of_channel[(channel, subject)] = i

    @property
    def channels(self) -> int:
        return len(self.channel_names)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.height, self.width, self.channels

    def _layout(self, pockets, rooms) -> list[Region]:
        if self.width < self.n_objects:
            raise ShapeMismatchError(f"width {self.width} cannot hold a limbo row of {self.n_objects} objects")
        regions: list[Region] = []
        top = 1
        if pockets:
            pocket_width = self.width // len(pockets)
            if pocket_width == 0:
                raise ShapeMismatchError(f"width {self.width} cannot hold {len(pockets)} container pockets")
            pocket_rows = math.ceil(self.n_objects / pocket_width)
            for k, container in enumerate(pockets):
                rows = range(top, top + pocket_rows)
                cols = range(k * pocket_width, (k + 1) * pocket_width)
                regions.append(Region(container.name, np.array([(r, c) for r in rows for c in cols])))
            top += pocket_rows
        if rooms:
            band = self.width // len(rooms)
            for k, container in enumerate(rooms):
                last = k == len(rooms) - 1
                cols = range(k * band, self.width if last else (k + 1) * band)
                rows = range(top, self.height)
                regions.append(Region(container.name, np.array([(r, c) for r in rows for c in cols])))
        for region in regions:
            if len(region.cells) < self.n_objects or (region.cells[:, 0] >= self.height).any():
                raise ShapeMismatchError(
                    f"grid {self.height}x{self.width} is too small for region '{region.container}'"
                )
        return regions

    def render(self, state: ClosedState, rng: np.random.Generator) -> np.ndarray:
        """Отрисовать состояние; позиции внутри регионов берутся из rng"""
        if state.n != self.index.n:
            raise ShapeMismatchError(f"state has N={state.n}, renderer expects {self.index.n}")
        obs = np.zeros(self.shape, dtype=np.float32)
        true = state.true_indices()

        regions_of: list[list[int]] = [[] for _ in range(self.n_objects)]
        for i in true:
            if i in self._in_region:
                subject, region = self._in_region[i]
                regions_of[subject].append(region)

        cells_of: list[list[tuple[int, int]]] = [[] for _ in range(self.n_objects)]
        for r, region in enumerate(self.regions):
            members = [o for o in range(self.n_objects) if r in regions_of[o]]
            if not members:
                continue
            picks = rng.choice(len(region.cells), size=len(members), replace=False)
            for o, p in zip(members, picks):
                cells_of[o].append((int(region.cells[p, 0]), int(region.cells[p, 1])))

        for o in range(self.n_objects):
            if not cells_of[o]:
                cells_of[o].append((0, o))
            for row, col in cells_of[o]:
                obs[row, col, o] = 1.0

        for i in true:
            if i in self._channel_of:
                channel, subject = self._channel_of[i]
                for row, col in cells_of[subject]:
                    obs[row, col, channel] = 1.0
        return obs

    def decode_oracle(self, obs: np.ndarray) -> ClosedState:
        """
        Восстановить состояние по тензору, полученному из render

        Raises:
            MalformedObservationError: тензор не мог быть получен рендерером
        """
        obs = np.asarray(obs)
        if obs.shape != self.shape:
            raise MalformedObservationError(f"observation shape {obs.shape}, expected {self.shape}")
        if not np.isin(obs, (0.0, 1.0)).all():
            raise MalformedObservationError("observation values must be exactly 0 or 1")

        glyphs = obs[:, :, : self.n_objects] > 0
        overlays = obs[:, :, self.n_objects :] > 0
        if (glyphs.sum(axis=2) > 1).any():
            raise MalformedObservationError("two objects share a cell")
        if (overlays.any(axis=2) & ~glyphs.any(axis=2)).any():
            raise MalformedObservationError("overlay drawn on an empty cell")

        bits = 0
        for o in range(self.n_objects):
            rows, cols = np.nonzero(glyphs[:, :, o])
            if rows.size == 0:
                continue
            regions = self.region_map[rows, cols]
            if (regions == UNUSED).any():
                raise MalformedObservationError(f"object '{self.objects[o].name}' drawn outside every region")
            limbo = regions == LIMBO
            if limbo.any() and (rows.size != 1 or cols[0] != o):
                raise MalformedObservationError(f"object '{self.objects[o].name}' misplaced in the limbo row")
            placed = regions[~limbo]
            if placed.size != np.unique(placed).size:
                raise MalformedObservationError(f"object '{self.objects[o].name}' drawn twice in one region")
            for r in placed:
                prop = self._in_prop.get((o, int(r)))
                if prop is None:
                    raise MalformedObservationError(f"object '{self.objects[o].name}' cannot be in that region")
                bits |= 1 << prop

            values = overlays[rows, cols, :]
            inconsistent = values.any(axis=0) & ~values.all(axis=0)
            if inconsistent.any():
                raise MalformedObservationError(f"overlay differs between cells of '{self.objects[o].name}'")
            for k in np.nonzero(values.all(axis=0))[0]:
                prop = self._prop_of_channel.get((int(k) + self.n_objects, o))
                if prop is None:
                    name = self.channel_names[int(k) + self.n_objects]
                    raise MalformedObservationError(f"channel '{name}' does not apply to '{self.objects[o].name}'")
                bits |= 1 << prop
        return ClosedState(bits, self.index.n)

    def object_masks(self, obs: np.ndarray) -> np.ndarray:
        """Маски всех объектов (|O|, H, W) из каналов глифов"""
        if obs.shape[-1] != self.channels or obs.shape[-3:-1] != (self.height, self.width):
            raise ShapeMismatchError(f"observation shape {obs.shape}, expected {self.shape}")
        return np.moveaxis(obs[..., : self.n_objects], -1, -3)
