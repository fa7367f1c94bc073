# src/percolab/api/__init__.py

def init_app(cli):
    # Import command modules
    from . import analysis, experiments

    # Register commands
    for command in experiments.commands + analysis.commands:
        cli.add_command(command)
