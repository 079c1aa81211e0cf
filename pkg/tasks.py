from dotenv import load_dotenv
from invoke import task

load_dotenv()


@task
def test(c, slow=True):
    """Runs the pytest suites."""
    c.run("pytest" if slow else "pytest -m 'not slow'", pty=True)


@task
def verify(c, seed=0):
    """Runs every self-check through the CLI."""
    c.run(f"python main.py verify --seed {seed}", pty=True)


@task
def format(c):
    c.run("black probe_witness tests main.py tasks.py")
