#pragma once

#include <functional>
#include <string>
#include <vector>

#include "loggas/common.hpp"

namespace loggas {

// Smooth test function with its first two derivatives.
struct TestFunction {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
};

TestFunction constant_function(double c);
// chi_R(x) x^k
TestFunction windowed_monomial(int k, double R);
// chi_R(x) Re 1/(x - z) and chi_R(x) Im 1/(x - z)
TestFunction windowed_stieltjes_re(cplx z, double R);
TestFunction windowed_stieltjes_im(cplx z, double R);
// exp(-1/(1-u^2)), u = (x - centre)/width, zero for |u| >= 1
TestFunction bump_function(double centre, double width);

// Windowed x, x^2, x^3; windowed Re/Im f_z for z in {i, 0.5i, 1+0.5i}; one bump.
std::vector<TestFunction> default_panel(double R);
TestFunction panel_function(const std::string& name, double R);

}  // namespace loggas
