import click

from config import Config


def create_cli(config_class=Config) -> click.Group:
    """Command factory: the phasespace group with every command registered"""
    from phasespace.commands import COMMANDS, build_root

    cli = build_root(config_class)
    for command in COMMANDS:
        cli.add_command(command)

    return cli
