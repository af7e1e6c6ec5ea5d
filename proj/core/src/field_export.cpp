#include "rmm/field_export.hpp"

#include <iomanip>

#include "rmm/rmm_solver.hpp"

namespace rmm {

namespace {
Eigen::Vector2d centre(const StructuredMesh& mesh, int e) {
  return {mesh.x0() + (e % mesh.nx() + 0.5) * mesh.h(),
          mesh.y0() + (e / mesh.nx() + 0.5) * mesh.h()};
}
}  // namespace

void write_displacement_csv(std::ostream& os, const StructuredMesh& mesh,
                            const fem::DofMap& dofs, const Eigen::VectorXd& q) {
  os << "node_id,x,y,ux,uy\n" << std::setprecision(12);
  for (int n = 0; n < mesh.node_count(); ++n) {
    const int d = dofs.node_dof[n];
    if (d < 0) continue;
    const Eigen::Vector2d x = mesh.node_coord(n);
    os << n << ',' << x.x() << ',' << x.y() << ',' << q[d] << ',' << q[d + 1] << '\n';
  }
}

void write_microdistortion_csv(std::ostream& os, const RmmProblem& problem,
                               const Eigen::VectorXd& q) {
  const auto& mesh = problem.mesh();
  const Eigen::MatrixXd p = problem.microdistortion_at_centres(q);
  os << "element_id,x,y,p11,p12,p21,p22\n" << std::setprecision(12);
  for (int e = 0; e < mesh.element_count(); ++e) {
    if (!mesh.solid(e)) continue;
    const Eigen::Vector2d c = centre(mesh, e);
    os << e << ',' << c.x() << ',' << c.y();
    for (int j = 0; j < 4; ++j) os << ',' << p(e, j);
    os << '\n';
  }
}

void write_mesh_csv(std::ostream& os, const StructuredMesh& mesh) {
  os << "element_id,x,y,phase\n" << std::setprecision(12);
  for (int e = 0; e < mesh.element_count(); ++e) {
    const Eigen::Vector2d c = centre(mesh, e);
    os << e << ',' << c.x() << ',' << c.y() << ',' << mesh.phase(e) << '\n';
  }
}

}  // namespace rmm
