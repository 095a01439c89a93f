from rmtcap.cli import main

main()
