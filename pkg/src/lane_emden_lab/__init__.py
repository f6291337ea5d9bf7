"""Numerical toolkit for the critical Lane-Emden system -Δu = v^p, -Δv = u^q.

Submodules:
    radial_groundstate   entire-space ground states by shooting, decay laws, masses
    greens_ball          explicit Green's function, Robin function and Poisson kernel on balls
    gtilde_field         the iterated Green potential G~ and its regular part H~
    halfspace_criterion  half-space integrals deciding the boundary growth condition
    bounded_solver       radial solutions on balls for slightly subcritical exponents
    pohozaev_verify      local Pohozaev identity and Green flux checks
    cli                  command line entry point
"""

__version__ = "0.1.0"
