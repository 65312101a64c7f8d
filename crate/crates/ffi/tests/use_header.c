#include "spheremax.h"

int main(void) {
    SmxGrid *g = NULL;
    double v[4] = {1.0, 2.0, 3.0, 4.0};
    double norm = 0.0;
    char msg[128];
    if (smx_grid_from_values(1, 4, 1.0, v, 4, &g) != SMX_STATUS_OK) {
        smx_last_error(msg, sizeof msg);
        return 1;
    }
    smx_grid_lp_norm(g, 2.0, &norm);
    smx_grid_free(g);
    return norm > 0.0 ? 0 : 1;
}
