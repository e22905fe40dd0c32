#include <sloshsim/frames.hpp>

#include <cmath>
#include <stdexcept>

namespace sloshsim {

Mat3 skew(const Vec3& v) {
    Mat3 m;
    m <<    0, -v.z(),  v.y(),
         v.z(),     0, -v.x(),
        -v.y(),  v.x(),     0;
    return m;
}

Mat3 dyad(const Vec3& a, const Vec3& b) { return a * b.transpose(); }

Mat3 rot_qp(double theta, double phi) {
    const double c = std::cos(theta), s = std::sin(theta);
    const double cp = std::cos(phi), sp = std::sin(phi);
    Mat3 m;
    m <<      c,  0,     -s,
         -s * sp, cp, -c * sp,
          s * cp, sp,  c * cp;
    return m;
}

Vec3 pend_position(double theta, double phi, double l) {
    if (!(l > 0.0))
        throw std::invalid_argument("pend_position: rod length must be positive");
    const double c = std::cos(theta);
    return l * Vec3(std::sin(theta), c * std::sin(phi), -c * std::cos(phi));
}

PendRates pend_rates(const PendulumAngles& a) {
    const double c = std::cos(a.theta), s = std::sin(a.theta);
    PendRates out;
    out.omega_qp = Vec3(a.phi_dot * c, -a.theta_dot, -a.phi_dot * s);
    out.omega_dot_partial =
        Vec3(-a.phi_dot * a.theta_dot * s, 0.0, -a.phi_dot * a.theta_dot * c);
    return out;
}

Mat3 quat_to_dcm(const Quat& q) {
    const double w = q(0), x = q(1), y = q(2), z = q(3);
    Mat3 m;
    m << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
         2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return m;
}

Quat quat_mul(const Quat& a, const Quat& b) {
    const double w1 = a(0), x1 = a(1), y1 = a(2), z1 = a(3);
    const double w2 = b(0), x2 = b(1), y2 = b(2), z2 = b(3);
    return Quat(w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
                w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
                w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
                w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2);
}

Quat quat_deriv(const Quat& q, const Vec3& omega_B) {
    return 0.5 * quat_mul(q, Quat(0.0, omega_B.x(), omega_B.y(), omega_B.z()));
}

Quat quat_from_rotvec(const Vec3& rotvec) {
    const double angle = rotvec.norm();
    if (angle < 1e-300) return Quat(1, 0, 0, 0);
    const Vec3 axis = rotvec / angle;
    const double h = 0.5 * angle;
    const double s = std::sin(h);
    return Quat(std::cos(h), s * axis.x(), s * axis.y(), s * axis.z());
}

Quat quat_normalized(const Quat& q) { return q / q.norm(); }

}  // namespace sloshsim
