import heapq
from dataclasses import dataclass
from typing import Any, Callable, Collection, Hashable, Optional, Tuple

import networkx as nx


@dataclass(frozen=True)
class ShortestPath:
    cost: float
    edge_ids: Tuple[Any, ...]
    nodes: Tuple[Hashable, ...]

    @property
    def target(self) -> Hashable:
        return self.nodes[-1]


def lexicographic_shortest_path(
    graph: nx.Graph,
    source: Hashable,
    targets: Collection[Hashable],
    weight: str,
    edge_key: str = "edge_id",
    usable: Optional[Callable[[Hashable, Hashable, dict], bool]] = None,
) -> Optional[ShortestPath]:
    """Minimum-cost path from ``source`` to the nearest of ``targets``.

    Ties are broken by the lexicographically smallest sequence of edge ids.
    Heap entries are ordered by ``(cost, edge_ids)``; with strictly positive
    weights the first settled target is the answer. Returns None when no
    target is reachable.
    """
    if source not in graph:
        return None

    targets = set(targets)
    heap = [(0, (), source, (source,))]
    settled = set()

    while heap:
        cost, edge_ids, node, nodes = heapq.heappop(heap)
        if node in settled:
            continue
        settled.add(node)

        if node in targets:
            return ShortestPath(cost=cost, edge_ids=edge_ids, nodes=nodes)

        for neighbour, data in graph[node].items():
            if neighbour in settled:
                continue
            if usable is not None and not usable(node, neighbour, data):
                continue
            heapq.heappush(
                heap,
                (
                    cost + data[weight],
                    edge_ids + (data[edge_key],),
                    neighbour,
                    nodes + (neighbour,),
                ),
            )

    return None
