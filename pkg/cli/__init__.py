"""Command-line front end: one subcommand per operation, data on stdout or --out"""
