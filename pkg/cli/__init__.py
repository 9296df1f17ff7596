"""Command-line surface: config loading, subcommands and artifact emission."""
