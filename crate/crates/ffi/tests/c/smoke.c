#include <stdio.h>
#include "gda.h"

int main(void) {
    GdaGraph *g = NULL;
    GdaSampling *s = NULL;
    if (gda_graph_line(21, &g) != GDA_STATUS_OK) return 1;
    if (gda_best_start_bs_bfis(g, 7, 1e-4, 1.0, &s) != GDA_STATUS_OK) return 2;
    unsigned char flags[21];
    if (gda_sampling_copy_sampled(s, flags, 21) != GDA_STATUS_OK) return 3;
    printf("%.6f %zu", gda_sampling_threshold(s), gda_sampling_count(s));
    for (int i = 0; i < 21; i++)
        if (flags[i]) printf(" %d", i);
    printf("\n");
    if (gda_graph_line(1, &g) != GDA_STATUS_INVALID_ARGUMENT) return 4;
    char msg[128];
    gda_last_error_message(msg, sizeof msg);
    printf("%s\n", msg);
    gda_sampling_free(s);
    gda_graph_free(g);
    return 0;
}
