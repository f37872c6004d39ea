from catbp_engine.cli import main

main()
