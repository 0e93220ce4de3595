from vfnif.commands import bench, evaluate, predict, train, verify

# Registration order is the order shown in --help.
COMMANDS = (train, evaluate, predict, verify, bench)

__all__ = ["COMMANDS"]
