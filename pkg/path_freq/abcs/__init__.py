from path_freq.abcs.gfunction import GFunction

__all__ = ["GFunction"]
