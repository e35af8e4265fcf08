from cmfib.cli import main

main()
