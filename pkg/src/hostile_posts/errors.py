"""Exception hierarchy. Each family maps to one CLI exit code."""


class HostilePostsError(Exception):
    exit_code = 1


class ConfigError(HostilePostsError):
    exit_code = 1


class DataError(HostilePostsError):
    exit_code = 2


class TrainingError(HostilePostsError):
    exit_code = 3


class BundleError(DataError):
    pass
