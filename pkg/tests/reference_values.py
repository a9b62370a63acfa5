"""Auto-generated by tests/_gen_reference.py; do not edit by hand."""

CONC_300NM_20US = 1.0454858703372030e+22
CONC_0NM_20US = 1.3760488215894539e+23
POB_300NM_20US = 0.00079813124731303901
POB_600NM_20US = 3.5004774880610014e-7
V_OBS_45NM = 3.8170350741115988e-22

PSELF_20US = 0.010146806653733142
PSELF_40US = 0.0036500779863914730
PSELF_60US = 0.0019983739197474710
PSELF_80US = 0.0013017435741054749
PSELF_100US = 0.00093307130530356781
PSELF_420US = 0.00010897869434998808
PSELF_QUAD_20US = 0.010146806653733142
PSELF_X_0P02 = 6.0165781054863130e-6
T_FOR_X_0P02 = 0.0028994845360824742
PSELF_X_0P009 = 5.4836562411482816e-7
T_FOR_X_0P009 = 0.014318442153493700
PSELF_X_0P001 = 7.5225232671216941e-10
T_FOR_X_0P001 = 1.1597938144329897
PSELF_X_0P0001 = 7.5225277355015840e-13
T_FOR_X_0P0001 = 115.97938144329897

POIS_2_3 = 0.67667641618306346
POIS_2_3P2 = 0.85712346049854705
POIS_0P5_1 = 0.60653065971263342
POIS_61P3_60 = 0.41698778938640147
POIS_750_800 = 0.96360549088474395
POIS_1E4_1E4 = 0.49867019166004480
POIS_1E4_9900 = 0.15744337553874304
POIS_1E5_99500 = 0.056652008947040358
POIS_3P7_0P5 = 0.024723526470339391

W_SR_TB200_LAG0 = 0.0039286603395652429
W_SD_TB200_LAG0 = 0.00030614340156782827
W_RR_TB200_LAG0 = 0.018030073439281129
W_SR_TB200_LAG1 = 0.00093456768306426400
W_SD_TB200_LAG1 = 0.00050820096079874632
W_RR_TB200_LAG1 = 0.0011429693153130703
W_SR_TB200_LAG2 = 0.00042829414072267597
W_SD_TB200_LAG2 = 0.00030514664204313950
W_RR_TB200_LAG2 = 0.00047884931980451432
W_SR_TB200_LAG3 = 0.00025704873730610441
W_SD_TB200_LAG3 = 0.00020315471993802301
W_RR_TB200_LAG3 = 0.00027773344710490366
W_SR_TB400_LAG0 = 0.0039286603395652429
W_SD_TB400_LAG0 = 0.00030614340156782827
W_RR_TB400_LAG0 = 0.018030073439281129
W_SR_TB400_LAG1 = 0.00042829414072267597
W_SD_TB400_LAG1 = 0.00030514664204313950
W_RR_TB400_LAG1 = 0.00047884931980451432
W_SR_TB400_LAG2 = 0.00017576767599239132
W_SD_TB400_LAG2 = 0.00014677367987098300
W_RR_TB400_LAG2 = 0.00018650350968147253
W_SR_TB400_LAG3 = 0.00010091846238033422
W_SD_TB400_LAG3 = 8.9249419225003297e-5
W_RR_TB400_LAG3 = 0.00010507989371377427
W_SR_TB200_M10_T10_LAG0 = 0.0074626578627351485

MU_RELAY_J1 = 19.643301697826214
PE1_RELAY_J1_XI20 = 0.25109816132751156
PE1_RELAY_J2_HIST1_XI20 = 0.082182561955895895
PE2_FD1_J1_XI20 = 0.37609574941090907
PE2_FD2_J2_HIST_XI20 = 0.50000000000000000
XI_ADP_J2 = 110.15036719640564
PE2_FDADP_J2_HIST_XI20 = 0.31148093885324152

ERF_0P1 = 0.11246291601828489
ERF_0P25 = 0.27632639016823693
ERF_0P5 = 0.52049987781304654
ERF_1P0 = 0.84270079294971487
ERF_1P5 = 0.96610514647531073
ERF_2P0 = 0.99532226501895273
ERF_3P0 = 0.99997790950300141
