#ifndef STEINREC_ASSIGNMENT_HPP
#define STEINREC_ASSIGNMENT_HPP

#include <Eigen/Core>
#include <vector>

namespace steinrec {

// Minimum-cost perfect assignment on a square cost matrix (Hungarian
// algorithm with potentials, O(n^3)). Returns the column matched to each row.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace steinrec

#endif
