from setuptools import setup, find_packages


setup(
    name="stableqa",
    version="0.1.0",
    description="Question answering by parsing text into facts and reasoning over them with answer set programs.",
    packages=find_packages(exclude=["notebooks", "tests"]),
    package_data={"stableqa": ["assets/*.yml", "assets/modules/*", "assets/prompts/*.yml", "templates/*.jinja"]},
    install_requires=[line.strip() for line in open("requirements.txt") if line.strip() and not line.startswith("#")],
    entry_points={"console_scripts": ["stableqa = stableqa.__main__:cli.run"]},
)
