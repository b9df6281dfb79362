#!/usr/bin/env python3

if __name__ == '__main__':         # pragma: no cover
    from plaplib.cli import cli
    cli()
