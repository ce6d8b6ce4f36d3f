from setuptools import setup, find_packages

from pdldp.version import get_version


setup(
    name='django-pdldp',
    version=get_version(),
    description='Pdldp is a toolkit for large deviations of small-noise path-dependent SDEs.',
    author='Lubos Matl',
    author_email='matllubos@gmail.com',
    url='https://github.com/matllubos/django-pdldp',
    license='BSD',
    package_dir={'pdldp': 'pdldp'},
    include_package_data=True,
    packages=find_packages(include=('pdldp', 'pdldp.*')),
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Framework :: Django',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: BSD License',
        'Operating System :: OS Independent',
        'Programming Language :: Python',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    install_requires=[
        'django>=3.2',
        'pyparsing>=2.4.7',
        'numpy>=1.20',
        'scipy>=1.7',
    ],
    entry_points={
        'console_scripts': [
            'pdldp = pdldp.cli:main',
        ],
    },
    zip_safe=False
)
