#pragma once

#include "shell_lane_emden/discretization.hpp"
#include "shell_lane_emden/geometry.hpp"
#include "shell_lane_emden/gk_sector.hpp"
#include "shell_lane_emden/grid.hpp"
#include "shell_lane_emden/nodal.hpp"
#include "shell_lane_emden/pohozaev.hpp"
#include "shell_lane_emden/radial_oracle.hpp"
#include "shell_lane_emden/solver.hpp"
#include "shell_lane_emden/sparse.hpp"
