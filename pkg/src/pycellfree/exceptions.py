"""Exceptions specific to pycellfree."""
import sys


class CliError(Exception):
    """Base class for errors thrown from a CLI.

    Has an exit function which exits the process with a message and status.
    """
    EXIT_MESSAGE = None
    RETURN_CODE = 1
    def report(self):
        """Write the error to stderr and return the exit status."""
        _name = type(self).__name__
        if self.EXIT_MESSAGE is not None:
            sys.stderr.write(_name + ": " + self.EXIT_MESSAGE + "\n")
        else:
            sys.stderr.write(_name + "\n")
        return self.RETURN_CODE

    def exit(self):
        raise SystemExit(self.report())


class InvalidArgument(ValueError):
    """Raised when an operation receives an argument outside its domain.

    ``key`` names the offending setting when there is one.
    """
    def __init__(self, message, key=None):
        self.key = key
        ValueError.__init__(self, message)


class UndefinedChannelHardening(InvalidArgument):
    """Raised when a UE's large-scale fading column is all zero."""
    def __init__(self, ues):
        self.ues = list(ues)
        InvalidArgument.__init__(
            self, "Channel hardening undefined for UE(s) {}: all-zero beta"
                  .format(", ".join(str(k) for k in self.ues)))


class ConfigError(CliError, ValueError):
    """Raised when an experiment configuration can't be used."""
    RETURN_CODE = 2
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        if path is not None and line is not None:
            message = "{}:{}: {}".format(path, line, message)
        elif path is not None:
            message = "{}: {}".format(path, message)
        self.message = message
        self.EXIT_MESSAGE = message
        ValueError.__init__(self, message)

    def __str__(self):
        return self.message


class OptimizationFailed(RuntimeError, CliError):
    """Raised when max-min power control doesn't converge.

    The last feasible power coefficients are kept so that a caller can
    inspect (or knowingly use) them; nothing falls back silently.
    """
    RETURN_CODE = 3
    def __init__(self, reason, last_feasible, t_lo, t_hi, iterations):
        self.reason = reason
        self.last_feasible = last_feasible
        self.t_lo = t_lo
        self.t_hi = t_hi
        self.iterations = iterations
        message = ("Max-min power control failed after {} bisection steps "
                   "(SINR bracket [{:.6g}, {:.6g}]): {}"
                   .format(iterations, t_lo, t_hi, reason))
        self.EXIT_MESSAGE = message
        RuntimeError.__init__(self, message)
