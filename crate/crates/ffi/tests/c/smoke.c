#include <math.h>
#include <stdio.h>
#include "plevel.h"

int main(void) {
    PlevelModel *model = NULL;
    PlevelWarp *warp = NULL;
    PlevelModelConstants c;
    PlevelCellSummary s;
    if (plevel_model_new(1.5, &model) != PLEVEL_STATUS_OK) return 1;
    if (plevel_model_constants(model, &c) != PLEVEL_STATUS_OK) return 2;
    if (fabs(c.kp - 97.338688) > 1e-5) return 3;
    if (plevel_warp_new(PLEVEL_FAMILY_KIND_BUMPED, 1.0, 0.1, &warp) != PLEVEL_STATUS_OK) return 4;
    if (plevel_verify(model, warp, &s) != PLEVEL_STATUS_OK) return 5;
    if (!s.passed || s.equality || !(s.margin > 0.0)) return 6;
    if (plevel_model_new(2.5, NULL) != PLEVEL_STATUS_NULL_POINTER) return 7;
    if (plevel_model_new(2.5, &model) != PLEVEL_STATUS_INVALID_PARAMETER || model != NULL) return 8;
    if (plevel_last_error() == NULL) return 9;
    printf("%s margin=%.6f\n", plevel_version(), s.margin);
    plevel_warp_free(warp);
    plevel_model_free(model);
    return 0;
}
