#ifndef LYAPCHI_LYAPCHI_HPP
#define LYAPCHI_LYAPCHI_HPP

// Umbrella header: the whole library except the CLI front end.

#include "lyapchi/circle_map.hpp"
#include "lyapchi/errors.hpp"
#include "lyapchi/normal.hpp"
#include "lyapchi/periodic_points.hpp"
#include "lyapchi/report.hpp"
#include "lyapchi/spectral.hpp"
#include "lyapchi/stats.hpp"

#endif // LYAPCHI_LYAPCHI_HPP
