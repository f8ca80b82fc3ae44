from grassfactor.cli import app

app(prog_name="grassfactor")
