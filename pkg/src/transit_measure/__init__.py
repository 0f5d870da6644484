"""Service quality measures for public transport route sets, timetables and line plans."""

from .core import (ODWeighting, PeriodicTimetable, RouteSet, RoutingProbabilities,
                   ValidationError, aggregate_weighted, make_route_set, make_timetable,
                   mod_period)
from .lineplan_logit import (LogitAllocation, construct_logit_timetable, f_and_fprime,
                             g_inverse, logit_lineplan_measure, solve_logit_allocation,
                             tau_of_y)
from .lineplan_sp import (SpAllocation, construct_sp_timetable, is_standard,
                          solve_sp_allocation, sp_lineplan_measure)
from .routeset import (Dispersion, Dominance, Logit, PerceivedTravelTime, ShortestPath,
                       TravelTime, Uniform, dominance, evaluate, measure,
                       measure_closed_form, routing)
from .timetable import (CyclicOrder, LogitPerceived, Representation, SpTravelTime,
                        departure_order, observed_measure, observed_route_set,
                        representation, timetable_measure)

__version__ = "0.1.0"
