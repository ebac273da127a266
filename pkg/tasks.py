#
# coding=utf-8
# flake8: noqa E302
"""Development related tasks to be run with 'invoke'.

Make sure you satisfy the following Python module requirements if you are trying to build a release:
    - wheel >= 0.31.0
    - setuptools >= 39.1.0
"""
import os
import pathlib
import shutil

import invoke

TASK_ROOT = pathlib.Path(__file__).resolve().parent
TASK_ROOT_STR = str(TASK_ROOT)
EXPERIMENTS_DIR = TASK_ROOT / 'experiments'


# shared function
def rmrf(items, verbose=True):
    """Silently remove a list of directories or files"""
    if isinstance(items, str):
        items = [items]

    for item in items:
        if verbose:
            print(f"Removing {item}")
        shutil.rmtree(item, ignore_errors=True)
        # rmtree doesn't remove bare files
        try:
            os.remove(item)
        except FileNotFoundError:
            pass


# create namespaces
namespace = invoke.Collection()
namespace_clean = invoke.Collection('clean')
namespace.add_collection(namespace_clean, 'clean')

#####
#
# pytest, mypy, flake8
#
#####


@invoke.task()
def pytest(context, junit=False, pty=True, slow=False):
    """Run tests and code coverage using pytest. Pass --slow to run the Monte-Carlo acceptance tests as well."""
    with context.cd(TASK_ROOT_STR):
        command_str = 'pytest --cov=mdpcert --cov-append --cov-report=term --cov-report=html '
        if slow:
            command_str += ' -m "slow or not slow" '
        if junit:
            command_str += ' --junitxml=junit/test-results.xml '
        context.run(command_str + ' tests', pty=pty)


namespace.add_task(pytest)


@invoke.task()
def pytest_clean(context):
    """Remove pytest cache and code coverage files and directories"""
    # pylint: disable=unused-argument
    with context.cd(TASK_ROOT_STR):
        rmrf(['.pytest_cache', '.cache', 'htmlcov', '.coverage', '.hypothesis'])


namespace_clean.add_task(pytest_clean, 'pytest')


@invoke.task()
def mypy(context):
    """Run mypy optional static type checker"""
    with context.cd(TASK_ROOT_STR):
        context.run("mypy mdpcert")


namespace.add_task(mypy)


@invoke.task()
def mypy_clean(context):
    """Remove mypy cache directory"""
    # pylint: disable=unused-argument
    with context.cd(TASK_ROOT_STR):
        rmrf(['.mypy_cache', 'dmypy.json', 'dmypy.sock'])


namespace_clean.add_task(mypy_clean, 'mypy')


# Flake8 - linter and tool for style guide enforcement and linting
@invoke.task()
def flake8(context):
    """Run flake8 linter and tool for style guide enforcement"""
    with context.cd(TASK_ROOT_STR):
        context.run("flake8")


namespace.add_task(flake8)


@invoke.task()
def format(context):
    """Reformat sources with isort and black"""
    with context.cd(TASK_ROOT_STR):
        context.run("isort mdpcert tests tasks.py noxfile.py")
        context.run("black mdpcert tests tasks.py noxfile.py")


namespace.add_task(format)


@invoke.task
def nox_clean(context):
    """Remove nox virtualenvs and logs"""
    # pylint: disable=unused-argument
    with context.cd(TASK_ROOT_STR):
        rmrf('.nox')


namespace_clean.add_task(nox_clean, 'nox')


#####
#
# experiments
#
#####


@invoke.task(help={'name': 'config file name in experiments/ without .json', 'fit': 'x field of the slope fit'})
def sweep(context, name, fit=''):
    """Run one experiment sweep from the experiments directory"""
    with context.cd(TASK_ROOT_STR):
        cmdline = f"mdpcert sweep --config {EXPERIMENTS_DIR / (name + '.json')}"
        if fit:
            cmdline += f' --fit {fit}'
        context.run(cmdline, pty=True)


namespace.add_task(sweep)


@invoke.task()
def verify(context, seeds=100):
    """Run the lemma battery"""
    with context.cd(TASK_ROOT_STR):
        context.run(f'mdpcert verify-lemmas --seeds {seeds}', pty=True)


namespace.add_task(verify)


#####
#
# documentation
#
#####
DOCS_SRCDIR = 'docs'
DOCS_BUILDDIR = os.path.join('docs', '_build')
SPHINX_OPTS = '-nvWT'  # Be nitpicky, verbose, and treat warnings as errors


@invoke.task()
def docs(context, builder='html'):
    """Build documentation using sphinx"""
    with context.cd(TASK_ROOT_STR):
        cmdline = f'python -msphinx -M {builder} {DOCS_SRCDIR} {DOCS_BUILDDIR} {SPHINX_OPTS}'
        context.run(cmdline, pty=True)


namespace.add_task(docs)


@invoke.task()
def doc8(context):
    """Check documentation with doc8"""
    with context.cd(TASK_ROOT_STR):
        context.run('doc8 docs --ignore-path docs/_build --ignore-path docs/.nox')


namespace.add_task(doc8)


@invoke.task
def docs_clean(context):
    """Remove rendered documentation"""
    # pylint: disable=unused-argument
    with context.cd(TASK_ROOT_STR):
        rmrf(DOCS_BUILDDIR)


namespace_clean.add_task(docs_clean, name='docs')


#####
#
# build
#
#####
BUILDDIR = 'build'
DISTDIR = 'dist'


@invoke.task()
def build_clean(context):
    """Remove the build and dist directories"""
    # pylint: disable=unused-argument
    with context.cd(TASK_ROOT_STR):
        rmrf([BUILDDIR, DISTDIR])


namespace_clean.add_task(build_clean, 'build')


@invoke.task()
def eggs_clean(context):
    """Remove egg directories"""
    # pylint: disable=unused-argument
    with context.cd(TASK_ROOT_STR):
        dirs = {'.eggs'}
        dirs.update(name for name in os.listdir(os.curdir) if name.endswith(('.egg-info', '.egg')))
        rmrf(dirs)


namespace_clean.add_task(eggs_clean, 'eggs')


@invoke.task()
def pycache_clean(context):
    """Remove __pycache__ directories"""
    # pylint: disable=unused-argument
    with context.cd(TASK_ROOT_STR):
        dirs = set()
        for root, dirnames, _ in os.walk(os.curdir):
            if '__pycache__' in dirnames:
                dirs.add(os.path.join(root, '__pycache__'))
        print("Removing __pycache__ directories")
        rmrf(dirs, verbose=False)


namespace_clean.add_task(pycache_clean, 'pycache')

#
# make a dummy clean task which runs all the tasks in the clean namespace
clean_tasks = list(namespace_clean.tasks.values())


@invoke.task(pre=clean_tasks, default=True)
def clean_all(_):
    """Run all clean tasks"""
    # pylint: disable=unused-argument
    pass


namespace_clean.add_task(clean_all, 'all')


@invoke.task(pre=[clean_all])
def wheel(context):
    """Build source and wheel distributions"""
    with context.cd(TASK_ROOT_STR):
        context.run('python setup.py sdist bdist_wheel')


namespace.add_task(wheel)
