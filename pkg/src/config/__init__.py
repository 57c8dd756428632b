"""Configuration: environment settings and TOML loading."""
