"""Exception hierarchy shared by the library and the CLI.

Every error the CLI can surface carries an ``exit_code`` so subcommands map
failures onto the documented process exit statuses (2 config, 3 data,
4 numeric).
"""


class BridgeBidError(Exception):
    """Base class for all bridgebid errors."""

    exit_code = 1


class ConfigError(BridgeBidError):
    """Invalid run configuration (bad flag combination, malformed config file)."""

    exit_code = 2


class DataError(BridgeBidError):
    """Malformed or inconsistent input data (datasets, deal text, checkpoints)."""

    exit_code = 3


class NumericError(BridgeBidError):
    """Non-finite values where finite numbers are required (losses, gradients)."""

    exit_code = 4


class ContractViolation(BridgeBidError):
    """A caller broke an operation's precondition (illegal call, terminal state,
    out-of-range tricks). Named after design-by-contract, not bridge contracts."""

    exit_code = 3
