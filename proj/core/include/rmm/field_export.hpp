#pragma once

#include <ostream>

#include <Eigen/Dense>

#include "rmm/fem_assembly.hpp"
#include "rmm/mesh.hpp"

namespace rmm {

class RmmProblem;

/// CSV of the Q2 displacement field: node_id,x,y,ux,uy (active nodes only).
void write_displacement_csv(std::ostream& os, const StructuredMesh& mesh,
                            const fem::DofMap& dofs, const Eigen::VectorXd& q);

/// CSV of P at element centres: element_id,x,y,p11,p12,p21,p22.
void write_microdistortion_csv(std::ostream& os, const RmmProblem& problem,
                               const Eigen::VectorXd& q);

/// CSV of the element layout: element_id,x,y,phase.
void write_mesh_csv(std::ostream& os, const StructuredMesh& mesh);

}  // namespace rmm
