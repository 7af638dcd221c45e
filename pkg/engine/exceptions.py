class SimulationError(Exception):
    pass


class SchedulingError(SimulationError):
    """An event was scheduled before the current clock."""


class InvariantViolation(SimulationError):
    def __init__(self, name: str, t_ms: int, detail: str = ""):
        self.name = name
        self.t_ms = t_ms
        self.detail = detail
        super().__init__(f"invariant {name} violated at t={t_ms}ms: {detail}")
