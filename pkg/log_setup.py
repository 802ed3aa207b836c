"""
Console logging setup (colorlog)
"""

import logging
import colorlog

_FORMAT = '%(log_color)s%(asctime)s %(levelname)-8s%(reset)s %(name)s: %(message)s'
_configured = False


def setup_logging(level: str = 'INFO') -> logging.Logger:
    """Install a single colored stream handler on the root logger"""
    global _configured
    root = logging.getLogger()
    root.setLevel(getattr(logging, str(level).upper(), logging.INFO))

    if not _configured:
        handler = colorlog.StreamHandler()
        handler.setFormatter(colorlog.ColoredFormatter(
            _FORMAT,
            datefmt='%H:%M:%S',
            log_colors={
                'DEBUG': 'cyan',
                'INFO': 'green',
                'WARNING': 'yellow',
                'ERROR': 'red',
                'CRITICAL': 'bold_red',
            },
        ))
        root.addHandler(handler)
        _configured = True

    return root
