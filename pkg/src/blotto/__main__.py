from blotto.cli import main

main()
