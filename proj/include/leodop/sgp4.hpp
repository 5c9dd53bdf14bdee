#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "leodop/error.hpp"
#include "leodop/tle.hpp"

namespace leodop {

/// Position (km) and velocity (km/s) in the TEME frame of date.
struct TemeState {
  Eigen::Vector3d position_km;
  Eigen::Vector3d velocity_kmps;
};

/// Near-earth SGP4 (WGS-72 constants), following the published reference
/// implementation. Deep-space element sets (period >= 225 min) are rejected.
class Sgp4 {
 public:
  static constexpr double kMu = 398600.8;           // km^3/s^2
  static constexpr double kEarthRadius = 6378.135;  // km
  static constexpr double kJ2 = 0.001082616;
  static constexpr double kJ3 = -0.00000253881;
  static constexpr double kJ4 = -0.00000165597;

  explicit Sgp4(const TleRecord& tle) {
    using std::cos;
    using std::pow;
    using std::sin;
    using std::sqrt;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    constexpr double deg = std::numbers::pi / 180.0;
    constexpr double x2o3 = 2.0 / 3.0;
    xke_ = 60.0 / sqrt(kEarthRadius * kEarthRadius * kEarthRadius / kMu);
    const double j3oj2 = kJ3 / kJ2;

    if (tle.eccentricity < 0.0 || tle.eccentricity >= 1.0) {
      throw Error(ErrorCode::UnsupportedOrbit, "eccentricity outside [0, 1)");
    }
    bstar_ = tle.bstar;
    ecco_ = tle.eccentricity;
    inclo_ = tle.inclination_deg * deg;
    nodeo_ = tle.raan_deg * deg;
    argpo_ = tle.arg_perigee_deg * deg;
    mo_ = tle.mean_anomaly_deg * deg;
    double no = tle.mean_motion * two_pi / 1440.0;  // rad/min

    // Recover the original (Brouwer) mean motion and semi-major axis.
    const double eccsq = ecco_ * ecco_;
    const double omeosq = 1.0 - eccsq;
    const double rteosq = sqrt(omeosq);
    const double cosio = cos(inclo_);
    const double cosio2 = cosio * cosio;
    const double ak = pow(xke_ / no, x2o3);
    const double d1 = 0.75 * kJ2 * (3.0 * cosio2 - 1.0) / (rteosq * omeosq);
    double del = d1 / (ak * ak);
    const double adel = ak * (1.0 - del * del - del * (1.0 / 3.0 + 134.0 * del * del / 81.0));
    del = d1 / (adel * adel);
    no /= (1.0 + del);
    no_ = no;

    const double ao = pow(xke_ / no, x2o3);
    const double sinio = sin(inclo_);
    const double po = ao * omeosq;
    const double con42 = 1.0 - 5.0 * cosio2;
    con41_ = -con42 - cosio2 - cosio2;
    const double posq = po * po;
    const double rp = ao * (1.0 - ecco_);

    if (two_pi / no_ >= 225.0) {
      throw Error(ErrorCode::UnsupportedOrbit, "deep-space element set (period >= 225 min)");
    }
    if (omeosq < 0.0 || no_ <= 0.0) throw Error(ErrorCode::PropagationDiverged, "invalid elements at epoch");

    isimp_ = rp < (220.0 / kEarthRadius + 1.0);
    const double ss = 78.0 / kEarthRadius + 1.0;
    double sfour = ss;
    double qzms24 = pow((120.0 - 78.0) / kEarthRadius, 4);
    const double perige = (rp - 1.0) * kEarthRadius;
    if (perige < 156.0) {
      sfour = perige - 78.0;
      if (perige < 98.0) sfour = 20.0;
      qzms24 = pow((120.0 - sfour) / kEarthRadius, 4);
      sfour = sfour / kEarthRadius + 1.0;
    }
    const double pinvsq = 1.0 / posq;
    const double tsi = 1.0 / (ao - sfour);
    eta_ = ao * ecco_ * tsi;
    const double etasq = eta_ * eta_;
    const double eeta = ecco_ * eta_;
    const double psisq = std::abs(1.0 - etasq);
    const double coef = qzms24 * pow(tsi, 4);
    const double coef1 = coef / pow(psisq, 3.5);
    const double cc2 = coef1 * no_ *
                       (ao * (1.0 + 1.5 * etasq + eeta * (4.0 + etasq)) +
                        0.375 * kJ2 * tsi / psisq * con41_ * (8.0 + 3.0 * etasq * (8.0 + etasq)));
    cc1_ = bstar_ * cc2;
    double cc3 = 0.0;
    if (ecco_ > 1.0e-4) cc3 = -2.0 * coef * tsi * j3oj2 * no_ * sinio / ecco_;
    x1mth2_ = 1.0 - cosio2;
    cc4_ = 2.0 * no_ * coef1 * ao * omeosq *
           (eta_ * (2.0 + 0.5 * etasq) + ecco_ * (0.5 + 2.0 * etasq) -
            kJ2 * tsi / (ao * psisq) *
                (-3.0 * con41_ * (1.0 - 2.0 * eeta + etasq * (1.5 - 0.5 * eeta)) +
                 0.75 * x1mth2_ * (2.0 * etasq - eeta * (1.0 + etasq)) * cos(2.0 * argpo_)));
    cc5_ = 2.0 * coef1 * ao * omeosq * (1.0 + 2.75 * (etasq + eeta) + eeta * etasq);

    const double cosio4 = cosio2 * cosio2;
    const double temp1 = 1.5 * kJ2 * pinvsq * no_;
    const double temp2 = 0.5 * temp1 * kJ2 * pinvsq;
    const double temp3 = -0.46875 * kJ4 * pinvsq * pinvsq * no_;
    mdot_ = no_ + 0.5 * temp1 * rteosq * con41_ + 0.0625 * temp2 * rteosq * (13.0 - 78.0 * cosio2 + 137.0 * cosio4);
    argpdot_ = -0.5 * temp1 * con42 + 0.0625 * temp2 * (7.0 - 114.0 * cosio2 + 395.0 * cosio4) +
               temp3 * (3.0 - 36.0 * cosio2 + 49.0 * cosio4);
    const double xhdot1 = -temp1 * cosio;
    nodedot_ = xhdot1 + (0.5 * temp2 * (4.0 - 19.0 * cosio2) + 2.0 * temp3 * (3.0 - 7.0 * cosio2)) * cosio;
    omgcof_ = bstar_ * cc3 * cos(argpo_);
    xmcof_ = 0.0;
    if (ecco_ > 1.0e-4) xmcof_ = -x2o3 * coef * bstar_ / eeta;
    nodecf_ = 3.5 * omeosq * xhdot1 * cc1_;
    t2cof_ = 1.5 * cc1_;
    const double denom = std::abs(cosio + 1.0) > 1.5e-12 ? (1.0 + cosio) : 1.5e-12;
    xlcof_ = -0.25 * j3oj2 * sinio * (3.0 + 5.0 * cosio) / denom;
    aycof_ = -0.5 * j3oj2 * sinio;
    delmo_ = pow(1.0 + eta_ * cos(mo_), 3);
    sinmao_ = sin(mo_);
    x7thm1_ = 7.0 * cosio2 - 1.0;

    if (!isimp_) {
      const double cc1sq = cc1_ * cc1_;
      d2_ = 4.0 * ao * tsi * cc1sq;
      const double temp = d2_ * tsi * cc1_ / 3.0;
      d3_ = (17.0 * ao + sfour) * temp;
      d4_ = 0.5 * temp * ao * tsi * (221.0 * ao + 31.0 * sfour) * cc1_;
      t3cof_ = d2_ + 2.0 * cc1sq;
      t4cof_ = 0.25 * (3.0 * d3_ + cc1_ * (12.0 * d2_ + 10.0 * cc1sq));
      t5cof_ = 0.2 * (3.0 * d4_ + 12.0 * cc1_ * d3_ + 6.0 * d2_ * d2_ + 15.0 * cc1sq * (2.0 * d2_ + cc1sq));
    }
  }

  /// Semi-major axis of the recovered mean elements, km.
  double semi_major_axis_km() const { return std::pow(xke_ / no_, 2.0 / 3.0) * kEarthRadius; }

  /// State at `tsince` minutes from the element epoch.
  TemeState propagate_minutes(double tsince) const {
    using std::cos;
    using std::fmod;
    using std::pow;
    using std::sin;
    using std::sqrt;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double vkmpersec = kEarthRadius * xke_ / 60.0;
    const double t = tsince;

    const double xmdf = mo_ + mdot_ * t;
    const double argpdf = argpo_ + argpdot_ * t;
    const double nodedf = nodeo_ + nodedot_ * t;
    double argpm = argpdf;
    double mm = xmdf;
    const double t2 = t * t;
    double nodem = nodedf + nodecf_ * t2;
    double tempa = 1.0 - cc1_ * t;
    double tempe = bstar_ * cc4_ * t;
    double templ = t2cof_ * t2;

    if (!isimp_) {
      const double delomg = omgcof_ * t;
      const double delm = xmcof_ * (pow(1.0 + eta_ * cos(xmdf), 3) - delmo_);
      const double temp = delomg + delm;
      mm = xmdf + temp;
      argpm = argpdf - temp;
      const double t3 = t2 * t;
      const double t4 = t3 * t;
      tempa = tempa - d2_ * t2 - d3_ * t3 - d4_ * t4;
      tempe = tempe + bstar_ * cc5_ * (sin(mm) - sinmao_);
      templ = templ + t3cof_ * t3 + t4 * (t4cof_ + t * t5cof_);
    }

    double nm = no_;
    double em = ecco_;
    const double inclm = inclo_;
    const double am = pow(xke_ / nm, 2.0 / 3.0) * tempa * tempa;
    nm = xke_ / pow(am, 1.5);
    em = em - tempe;
    if (em >= 1.0 || em < -0.001 || am < 0.95) {
      throw Error(ErrorCode::PropagationDiverged, "mean elements out of range (decayed orbit?)");
    }
    if (em < 1.0e-6) em = 1.0e-6;
    mm = mm + no_ * templ;
    double xlm = mm + argpm + nodem;
    nodem = fmod(nodem, two_pi);
    argpm = fmod(argpm, two_pi);
    xlm = fmod(xlm, two_pi);
    mm = fmod(xlm - argpm - nodem, two_pi);

    const double sinip = sin(inclm);
    const double cosip = cos(inclm);

    // Long-period periodics.
    const double axnl = em * cos(argpm);
    double temp = 1.0 / (am * (1.0 - em * em));
    const double aynl = em * sin(argpm) + temp * aycof_;
    const double xl = mm + argpm + nodem + temp * xlcof_ * axnl;

    // Kepler's equation.
    const double u = fmod(xl - nodem, two_pi);
    double eo1 = u;
    double tem5 = 9999.9;
    double sineo1 = 0.0;
    double coseo1 = 0.0;
    for (int ktr = 1; std::abs(tem5) >= 1.0e-12 && ktr <= 10; ++ktr) {
      sineo1 = sin(eo1);
      coseo1 = cos(eo1);
      tem5 = 1.0 - coseo1 * axnl - sineo1 * aynl;
      tem5 = (u - aynl * coseo1 + axnl * sineo1 - eo1) / tem5;
      if (std::abs(tem5) >= 0.95) tem5 = tem5 > 0.0 ? 0.95 : -0.95;
      eo1 += tem5;
    }

    // Short-period preliminary quantities.
    const double ecose = axnl * coseo1 + aynl * sineo1;
    const double esine = axnl * sineo1 - aynl * coseo1;
    const double el2 = axnl * axnl + aynl * aynl;
    const double pl = am * (1.0 - el2);
    if (pl < 0.0) throw Error(ErrorCode::PropagationDiverged, "semi-latus rectum < 0");

    const double rl = am * (1.0 - ecose);
    const double rdotl = sqrt(am) * esine / rl;
    const double rvdotl = sqrt(pl) / rl;
    const double betal = sqrt(1.0 - el2);
    temp = esine / (1.0 + betal);
    const double sinu = am / rl * (sineo1 - aynl - axnl * temp);
    const double cosu = am / rl * (coseo1 - axnl + aynl * temp);
    double su = std::atan2(sinu, cosu);
    const double sin2u = (cosu + cosu) * sinu;
    const double cos2u = 1.0 - 2.0 * sinu * sinu;
    temp = 1.0 / pl;
    const double temp1 = 0.5 * kJ2 * temp;
    const double temp2 = temp1 * temp;

    // Short-period periodics.
    const double mrt = rl * (1.0 - 1.5 * temp2 * betal * con41_) + 0.5 * temp1 * x1mth2_ * cos2u;
    su = su - 0.25 * temp2 * x7thm1_ * sin2u;
    const double xnode = nodem + 1.5 * temp2 * cosip * sin2u;
    const double xinc = inclm + 1.5 * temp2 * cosip * sinip * cos2u;
    const double mvt = rdotl - nm * temp1 * x1mth2_ * sin2u / xke_;
    const double rvdot = rvdotl + nm * temp1 * (x1mth2_ * cos2u + 1.5 * con41_) / xke_;

    const double sinsu = sin(su);
    const double cossu = cos(su);
    const double snod = sin(xnode);
    const double cnod = cos(xnode);
    const double sini = sin(xinc);
    const double cosi = cos(xinc);
    const double xmx = -snod * cosi;
    const double xmy = cnod * cosi;
    const Eigen::Vector3d uvec(xmx * sinsu + cnod * cossu, xmy * sinsu + snod * cossu, sini * sinsu);
    const Eigen::Vector3d vvec(xmx * cossu - cnod * sinsu, xmy * cossu - snod * sinsu, sini * cossu);

    if (mrt < 1.0) throw Error(ErrorCode::PropagationDiverged, "satellite has decayed");
    return {mrt * uvec * kEarthRadius, (mvt * uvec + rvdot * vvec) * vkmpersec};
  }

 private:
  double xke_ = 0.0;
  double bstar_ = 0.0, ecco_ = 0.0, inclo_ = 0.0, nodeo_ = 0.0, argpo_ = 0.0, mo_ = 0.0, no_ = 0.0;
  bool isimp_ = false;
  double con41_ = 0.0, x1mth2_ = 0.0, x7thm1_ = 0.0;
  double cc1_ = 0.0, cc4_ = 0.0, cc5_ = 0.0, eta_ = 0.0;
  double mdot_ = 0.0, argpdot_ = 0.0, nodedot_ = 0.0, omgcof_ = 0.0, xmcof_ = 0.0, nodecf_ = 0.0;
  double t2cof_ = 0.0, t3cof_ = 0.0, t4cof_ = 0.0, t5cof_ = 0.0;
  double d2_ = 0.0, d3_ = 0.0, d4_ = 0.0;
  double xlcof_ = 0.0, aycof_ = 0.0, delmo_ = 0.0, sinmao_ = 0.0;
};

}  // namespace leodop
