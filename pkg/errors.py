"""
Exception hierarchy for the multi-site optimizer.

Two families matter to callers:

- ``InputError``: the request itself is malformed (bad SOC file, bad ATE
  numbers, oracle instance too large). The CLI exits with status 2.
- ``InfeasibleError``: the request is well formed but the SOC cannot be
  tested on the target ATE. The CLI exits with status 1.
"""

INFEASIBLE_MESSAGE = "the SOC cannot be tested on the target ATE"


class SiteOptError(Exception):
    """Base class for every error raised by this package."""


class InputError(SiteOptError, ValueError):
    """Invalid input; ``line`` is set when the offending source line is known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SocSyntaxError(InputError):
    """The SOC document does not follow the grammar."""


class SocArityError(InputError):
    """A ScanChains declaration lists a different number of lengths than declared."""


class DuplicateModuleError(InputError):
    """Two modules of one SOC share a name."""


class ModelInputError(InputError):
    """A numeric model input is out of range (probabilities, counts, times)."""


class OracleCapError(InputError):
    """An instance exceeds the size caps of the brute-force oracle."""


class InfeasibleError(SiteOptError):
    """
    The SOC does not fit the ATE.

    Attributes:
        module (str | None): name of the module that cannot be fitted, if one is to blame.
        channels_needed (int | None): channel count the failing placement would have required.
    """

    def __init__(self, detail, module=None, channels_needed=None):
        self.module = module
        self.channels_needed = channels_needed
        super().__init__(f"{INFEASIBLE_MESSAGE}: {detail}")


class SiteBudgetError(InfeasibleError):
    """Per-site channel demand k leaves room for no site at all."""
