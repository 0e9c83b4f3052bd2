#pragma once

#include <vector>

#include "pss/fixed.hpp"

namespace pss {

struct Point {
    Fixed t;
    int node = 0;
};

// The (eps, phi-, phi+) predicate over a finite point set: every point sits in
// a window of length <= eps holding a point of every participant, the node's
// next point is not in (t, t+phi-) and is in [t+phi-, t+phi+]. Requirements
// that look past `horizon` are waived (see covered()).
// Throws std::invalid_argument unless phi- > 3 eps.
bool synchronized_points(const std::vector<Point>& pts, Fixed eps, Fixed phi_minus, Fixed phi_plus, Fixed horizon);
// Same, with an explicit participant set: a listed node without points makes
// any non-empty set fail.
bool synchronized_points(const std::vector<Point>& pts, const std::vector<int>& participants, Fixed eps,
                         Fixed phi_minus, Fixed phi_plus, Fixed horizon);

// True iff some window [a, a+eps] containing t holds a point of every node in
// `by_node` (each list sorted). A node with no point at or after a is excused
// when the window reaches past `horizon`, since its point may lie beyond.
bool covered(const std::vector<std::vector<Fixed>>& by_node, Fixed t, Fixed eps, Fixed horizon);

}  // namespace pss
