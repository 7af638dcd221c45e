class ScenarioError(Exception):
    """A scenario file that cannot be parsed or violates a world invariant."""

    def __init__(self, message: str, field: str = ""):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)
