"""Exception hierarchy shared by every module in the package."""


class MinStabError(Exception):
    """Base class for all errors raised by minstab."""


class InvalidSizeError(MinStabError, ValueError):
    """Network size is not a supported power of two."""


class TopologyParseError(MinStabError, ValueError):
    """A topology file could not be parsed or does not match the schema."""


class TopologyInvariantError(MinStabError, ValueError):
    """A topology violates a structural invariant.

    ``invariant`` names the failing check so callers can report it.
    """

    def __init__(self, invariant: str, detail: str):
        super().__init__(f"{invariant}: {detail}")
        self.invariant = invariant
        self.detail = detail


class InvalidTerminalError(MinStabError, ValueError):
    pass


class InvalidSwitchError(MinStabError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "invalid switch"


class UnresolvableTieError(MinStabError):
    """A tie loser ran out of candidates while ties were being resolved."""

    def __init__(self, switches):
        self.switches = tuple(sorted(switches))
        super().__init__(f"tie resolution exhausted the lists of switches {list(self.switches)}")


class InconsistentInputError(MinStabError, ValueError):
    pass


class InstanceTooLargeError(MinStabError, ValueError):
    pass


class InvalidInstanceError(MinStabError, ValueError):
    pass


class ConflictError(MinStabError, ValueError):
    pass
