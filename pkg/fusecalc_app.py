# fusecalc - possible-model reasoner with an embedded DL tableau
# Thin entry point; the application lives in the fusecalc package.

from fusecalc.main import main

if __name__ == '__main__':
    main()
