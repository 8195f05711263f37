#include <stdlib.h>

struct node {
  int value;
  struct node *next;
};

struct node *list_push(struct node *head, int value) {
  struct node *n = malloc(sizeof(struct node));
  if (n == NULL) {
    return head;
  }
  n->value = value;
  n->next = head;
  return n;
}

int list_length(const struct node *head) {
  int len = 0;
  while (head != NULL) {
    len++;
    head = head->next;
  }
  return len;
}

void list_free(struct node *head) {
  while (head != NULL) {
    struct node *next = head->next;
    free(head);
    head = next;
  }
}
