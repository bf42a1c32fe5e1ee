"""Support `python -m nsdecay`."""

from nsdecay.app import cli_main


if __name__ == "__main__":
    cli_main()
