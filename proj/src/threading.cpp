#include "plastopt/threading.hpp"

namespace plastopt {

namespace {
ExecMode g_mode = ExecMode::parallel;
}

ExecMode exec_mode() { return g_mode; }
void set_exec_mode(ExecMode mode) { g_mode = mode; }

}  // namespace plastopt
